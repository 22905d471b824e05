#include "ccsp/verifier.hpp"

#include "ccsp/error.hpp"
#include "ccsp/formula_io.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace ccsp {

const char* status_name(Status s) {
  switch (s) {
    case Status::Satisfied: return "Satisfied";
    case Status::Violated: return "Violated";
    case Status::NotApplicable: return "NotApplicable";
  }
  return "?";
}

const char* search_kind_name(SearchKind k) {
  switch (k) {
    case SearchKind::FoundWitness: return "FoundWitness";
    case SearchKind::Exhausted: return "Exhausted";
    case SearchKind::CertifiedEmpty: return "CertifiedEmpty";
  }
  return "?";
}

bool ViolationReport::ok() const { return violated_count() == 0 && range_violations.empty(); }

std::size_t ViolationReport::violated_count() const {
  return static_cast<std::size_t>(std::count_if(per_constraint.begin(), per_constraint.end(),
                                                [](const auto& r) { return r.status == Status::Violated; }));
}

std::string ViolationReport::to_text(const Formula& f) const {
  std::ostringstream o;
  o << (ok() ? "OK" : "VIOLATED") << " violated=" << violated_count() << " worst_margin=" << to_string(worst_margin)
    << " promise=" << (promise_ok() ? "ok" : "violated") << "\n";
  for (std::size_t i = 0; i < per_constraint.size(); ++i) {
    const auto& r = per_constraint[i];
    if (r.status == Status::Satisfied) continue;
    o << "  [" << i << "] " << constraint_text(f, f.constraints()[i]) << ": " << status_name(r.status);
    if (r.status == Status::Violated) o << " margin " << to_string(r.margin);
    o << "\n";
  }
  for (Var v : range_violations) o << "  range: " << f.name(v) << " outside [-1, 1]\n";
  for (Var v : promise_violations) o << "  promise: " << f.name(v) << " outside [-delta, delta]\n";
  return o.str();
}

namespace {

ConstraintResult equality(const Rational& d) {
  if (d == 0) return {Status::Satisfied, 0};
  return {Status::Violated, abs(d)};
}

ConstraintResult at_least_zero(const Rational& r) {
  if (r >= 0) return {Status::Satisfied, r};
  return {Status::Violated, -r};
}

ConstraintResult within(const Rational& d, const Rational& eps) {
  Rational slack = eps - abs(d);
  if (slack >= 0) return {Status::Satisfied, slack};
  return {Status::Violated, -slack};
}

ConstraintResult evaluate(const Formula& f, const Constraint& c, const Assignment& a,
                          const std::optional<Rational>& relax) {
  return std::visit(
      [&](const auto& k) -> ConstraintResult {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cons::Add>) {
          return equality(a.at(k.x) + a.at(k.y) - a.at(k.z));
        } else if constexpr (std::is_same_v<T, cons::Mul>) {
          return equality(a.at(k.x) * a.at(k.y) - a.at(k.z));
        } else if constexpr (std::is_same_v<T, cons::Square>) {
          Rational d = a.at(k.y) - a.at(k.x) * a.at(k.x);
          return relax ? within(d, *relax) : equality(d);
        } else if constexpr (std::is_same_v<T, cons::Nonneg>) {
          return at_least_zero(a.at(k.x));
        } else if constexpr (std::is_same_v<T, cons::EqConst>) {
          return equality(a.at(k.x) - k.value);
        } else if constexpr (std::is_same_v<T, cons::ExplicitEq>) {
          return equality(f.univariate(k.f).residual(a.at(k.x), a.at(k.y)));
        } else if constexpr (std::is_same_v<T, cons::ExplicitGeq>) {
          return at_least_zero(f.univariate(k.f).residual(a.at(k.x), a.at(k.y)));
        } else if constexpr (std::is_same_v<T, cons::ExplicitLeq>) {
          return at_least_zero(-f.univariate(k.f).residual(a.at(k.x), a.at(k.y)));
        } else if constexpr (std::is_same_v<T, cons::ImplicitEq>) {
          return equality(f.bivariate(k.f).eval(a.at(k.x), a.at(k.y)));
        } else if constexpr (std::is_same_v<T, cons::ImplicitGeq>) {
          return at_least_zero(f.bivariate(k.f).eval(a.at(k.x), a.at(k.y)));
        } else if constexpr (std::is_same_v<T, cons::RangeBound>) {
          const Rational& x = a.at(k.x);
          if (x < k.lo) return {Status::Violated, k.lo - x};
          if (x > k.hi) return {Status::Violated, x - k.hi};
          return {Status::Satisfied, std::min(Rational(x - k.lo), Rational(k.hi - x))};
        } else {
          static_assert(std::is_same_v<T, cons::ApproxSquare>);
          if (k.eps.kind == EpsToken::Kind::PowerTower) return {Status::NotApplicable, 0};
          return within(a.at(k.y) - a.at(k.x) * a.at(k.x), k.eps.value);
        }
      },
      c);
}

ViolationReport check_impl(const Formula& f, const Assignment& a, const std::optional<Rational>& relax) {
  ViolationReport rep;
  for (std::uint32_t i = 0; i < f.num_vars(); ++i) {
    if (!a.has(Var{i})) throw Error(Errc::MissingVariable, "no value for variable '" + f.name(Var{i}) + "'");
    if (abs(a.at(Var{i})) > f.delta()) rep.promise_violations.push_back(Var{i});
    if (relax && abs(a.at(Var{i})) > 1) rep.range_violations.push_back(Var{i});
  }
  for (const auto& c : f.constraints()) {
    rep.per_constraint.push_back(evaluate(f, c, a, relax));
    if (rep.per_constraint.back().status == Status::Violated && rep.per_constraint.back().margin > rep.worst_margin)
      rep.worst_margin = rep.per_constraint.back().margin;
  }
  return rep;
}

}  // namespace

ViolationReport check_exact(const Formula& f, const Assignment& a) { return check_impl(f, a, std::nullopt); }

ViolationReport check_relaxed(const Formula& f, const Assignment& a, const Rational& eps) {
  return check_impl(f, a, eps);
}

ViolationReport check_with(const Formula& f, const Assignment& a, const Guarantee& g) {
  if (g.kind == GuaranteeKind::Exact) return check_exact(f, a);
  return check_relaxed(f, a, *g.eps);
}

ApproxLemmaResult lemma_approx_M(const Formula& f) {
  ApproxLemmaResult out;
  const std::size_t n = f.num_vars();
  for (const auto& c : f.constraints())
    if (std::holds_alternative<cons::Square>(c)) ++out.squares;
  const std::size_t r = out.squares;
  // Psi adds a range statement per variable, an eta variable per square and the bound u.
  const std::size_t overhead = 4 * n + 4 * r + 4;
  out.complexity = std::max<std::uint64_t>(stats(f).encoding_length + overhead, 5 * (n + r + 1));
  if (r == 0) return out;
  // r * 2^(-2^(M+1)) < 2^(-2^(L+5))  <=>  2^(M+1) > 2^(L+5) + log2(r).
  // M + 1 <= L + 5 never works; M + 1 = L + 6 works iff 2^(L+5) > log2(r), which holds since
  // L >= 5 and r is a machine-sized count.
  const std::uint64_t L = out.complexity;
  const std::size_t bits = 64 - static_cast<std::size_t>(__builtin_clzll(static_cast<unsigned long long>(r)));
  const bool tight_ok = L + 5 >= 16 || (std::uint64_t{1} << (L + 5)) > bits;
  out.M = tight_ok ? L + 5 : L + 6;
  return out;
}

// ------------------------------------------------------------------ propagation

namespace {

using LinearTerms = std::vector<std::pair<Var, int>>;

LinearTerms linear_terms(const cons::Add& k) {
  LinearTerms t;
  auto bump = [&](Var v, int c) {
    for (auto& [w, cw] : t)
      if (w == v) {
        cw += c;
        return;
      }
    t.emplace_back(v, c);
  };
  bump(k.x, 1);
  bump(k.y, 1);
  bump(k.z, -1);
  t.erase(std::remove_if(t.begin(), t.end(), [](const auto& p) { return p.second == 0; }), t.end());
  return t;
}

/// Applies one propagation rule; returns true if a value was filled in.
bool propagate_one(const Formula& f, const Constraint& c, Assignment& a) {
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cons::EqConst>) {
          if (a.has(k.x)) return false;
          a.set(k.x, k.value);
          return true;
        } else if constexpr (std::is_same_v<T, cons::Add>) {
          LinearTerms t = linear_terms(k);
          const std::pair<Var, int>* unknown = nullptr;
          Rational acc = 0;
          for (const auto& p : t) {
            if (a.has(p.first)) {
              acc += p.second * a.at(p.first);
            } else {
              if (unknown) return false;
              unknown = &p;
            }
          }
          if (!unknown) return false;
          a.set(unknown->first, Rational(-acc / unknown->second));
          return true;
        } else if constexpr (std::is_same_v<T, cons::Square>) {
          if (!a.has(k.x) || a.has(k.y)) return false;
          a.set(k.y, Rational(a.at(k.x) * a.at(k.x)));
          return true;
        } else if constexpr (std::is_same_v<T, cons::Mul>) {
          if (!a.has(k.x) || !a.has(k.y) || a.has(k.z)) return false;
          a.set(k.z, Rational(a.at(k.x) * a.at(k.y)));
          return true;
        } else if constexpr (std::is_same_v<T, cons::ExplicitEq>) {
          if (!a.has(k.x) || a.has(k.y)) return false;
          UnivariateFn fn = f.univariate(k.f);
          if (!fn.is_polynomial()) return false;
          a.set(k.y, fn.eval_exact(a.at(k.x)));
          return true;
        } else {
          return false;
        }
      },
      c);
}

/// Same rules on known/unknown flags only.
bool propagate_flag(const Formula& f, const Constraint& c, std::vector<bool>& known) {
  auto kn = [&](Var v) { return static_cast<bool>(known[v.index]); };
  auto mark = [&](Var v) {
    known[v.index] = true;
    return true;
  };
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cons::EqConst>) {
          return !kn(k.x) && mark(k.x);
        } else if constexpr (std::is_same_v<T, cons::Add>) {
          std::optional<Var> unknown;
          for (const auto& p : linear_terms(k)) {
            if (kn(p.first)) continue;
            if (unknown) return false;
            unknown = p.first;
          }
          return unknown && mark(*unknown);
        } else if constexpr (std::is_same_v<T, cons::Square>) {
          return kn(k.x) && !kn(k.y) && mark(k.y);
        } else if constexpr (std::is_same_v<T, cons::Mul>) {
          return kn(k.x) && kn(k.y) && !kn(k.z) && mark(k.z);
        } else if constexpr (std::is_same_v<T, cons::ExplicitEq>) {
          return kn(k.x) && !kn(k.y) && f.univariate(k.f).is_polynomial() && mark(k.y);
        } else {
          return false;
        }
      },
      c);
}

std::size_t count_free(const Formula& f) {
  std::vector<bool> known(f.num_vars(), false);
  std::size_t free = 0;
  for (;;) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : f.constraints()) changed = propagate_flag(f, c, known) || changed;
    }
    auto it = std::find(known.begin(), known.end(), false);
    if (it == known.end()) return free;
    *it = true;
    ++free;
  }
}

bool all_known(const Constraint& c, const Assignment& a) {
  for (Var v : variables_of(c))
    if (!a.has(v)) return false;
  return true;
}

}  // namespace

void propagate(const Formula& f, Assignment& a) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : f.constraints()) changed = propagate_one(f, c, a) || changed;
  }
}

// ------------------------------------------------------------------ grid search

namespace {

struct GridSearch {
  const Formula& f;
  const SearchOptions& opt;
  std::vector<std::vector<Rational>> values;
  SearchResult result;

  bool dfs(Assignment a) {
    propagate(f, a);
    const bool complete = a.complete();
    if (complete) {
      ViolationReport rep = opt.relax_eps ? check_relaxed(f, a, *opt.relax_eps) : check_exact(f, a);
      if (rep.ok()) {
        result.kind = SearchKind::FoundWitness;
        result.witness = a;
        result.best = a;
        result.best_margin = 0;
        return true;
      }
      if (!result.best_margin || rep.worst_margin < *result.best_margin) {
        result.best = a;
        result.best_margin = rep.worst_margin;
      }
      return false;
    }
    for (const auto& c : f.constraints()) {
      if (!all_known(c, a)) continue;
      if (evaluate(f, c, a, opt.relax_eps).status == Status::Violated) return false;
    }
    std::uint32_t v = 0;
    while (a.has(Var{v})) ++v;
    for (const Rational& val : values[v]) {
      if (++result.nodes > opt.budget) throw Error(Errc::BudgetExceeded, "grid search node budget exhausted");
      Assignment b = a;
      b.set(Var{v}, val);
      if (dfs(std::move(b))) return true;
    }
    return false;
  }
};

}  // namespace

SearchResult grid_search(const Formula& f, const SearchOptions& opt) {
  if (opt.resolution == 0) throw Error(Errc::InvalidArgument, "resolution must be positive");
  std::size_t free = count_free(f);
  if (free > opt.max_free_vars)
    throw Error(Errc::BudgetExceeded, std::to_string(free) + " free variables after propagation (limit " +
                                          std::to_string(opt.max_free_vars) + ")");
  double estimate = 1;
  for (std::size_t i = 0; i < free; ++i) estimate *= static_cast<double>(opt.resolution + 1);
  if (estimate > static_cast<double>(opt.budget))
    throw Error(Errc::BudgetExceeded, "grid of " + std::to_string(static_cast<long long>(estimate)) +
                                          " points exceeds budget " + std::to_string(opt.budget));

  std::vector<bool> nonneg(f.num_vars(), false);
  for (const auto& c : f.constraints())
    if (const auto* k = std::get_if<cons::Nonneg>(&c)) nonneg[k->x.index] = true;

  GridSearch g{f, opt, {}, {}};
  for (std::uint32_t i = 0; i < f.num_vars(); ++i) {
    Rational lo = nonneg[i] ? Rational(0) : Rational(-f.delta()), hi = f.delta();
    std::vector<Rational> vals;
    for (std::size_t k = 0; k <= opt.resolution; ++k)
      vals.push_back(lo + (hi - lo) * ratio(static_cast<long>(k), static_cast<long>(opt.resolution)));
    // Visit values closest to zero first; small witnesses are the common case.
    std::stable_sort(vals.begin(), vals.end(), [](const Rational& a, const Rational& b) { return abs(a) < abs(b); });
    g.values.push_back(std::move(vals));
  }
  g.result.kind = SearchKind::Exhausted;
  g.dfs(Assignment(f.num_vars()));
  return g.result;
}

// ------------------------------------------------------------------ branch and prune

namespace {

using Box = std::vector<RInterval>;

bool narrow(RInterval& x, const RInterval& bound, bool& changed) {
  bool empty = false;
  RInterval n = intersect(x, bound, &empty);
  if (empty) return false;
  if (!(n == x)) {
    x = n;
    changed = true;
  }
  return true;
}

const Rational kHuge(Integer(1) << 200);

/// Returns false when the box is proven infeasible.
bool contract(const Formula& f, Box& box, const std::optional<Rational>& relax) {
  for (int round = 0; round < 8; ++round) {
    bool changed = false;
    for (const auto& c : f.constraints()) {
      bool ok = std::visit(
          [&](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, cons::EqConst>) {
              return narrow(box[k.x.index], RInterval(k.value), changed);
            } else if constexpr (std::is_same_v<T, cons::Nonneg>) {
              return narrow(box[k.x.index], RInterval(Rational(0), kHuge), changed);
            } else if constexpr (std::is_same_v<T, cons::RangeBound>) {
              return narrow(box[k.x.index], RInterval(k.lo, k.hi), changed);
            } else if constexpr (std::is_same_v<T, cons::Add>) {
              LinearTerms t = linear_terms(k);
              if (t.empty()) return true;
              for (const auto& [v, coef] : t) {
                RInterval rest(Rational(0));
                for (const auto& [w, cw] : t)
                  if (w != v) rest += RInterval(Rational(cw)) * box[w.index];
                RInterval sol = RInterval(Rational(Rational(-1) / coef)) * rest;
                if (!narrow(box[v.index], sol, changed)) return false;
              }
              return true;
            } else if constexpr (std::is_same_v<T, cons::Square>) {
              RInterval sq = ipow(box[k.x.index], 2);
              if (relax) sq = sq + RInterval(Rational(-*relax), *relax);
              return narrow(box[k.y.index], sq, changed);
            } else if constexpr (std::is_same_v<T, cons::ApproxSquare>) {
              Rational e = k.eps.kind == EpsToken::Kind::Explicit ? k.eps.value : Rational(1, 2);
              RInterval sq = ipow(box[k.x.index], 2) + RInterval(Rational(-e), e);
              return narrow(box[k.y.index], sq, changed);
            } else if constexpr (std::is_same_v<T, cons::Mul>) {
              return narrow(box[k.z.index], box[k.x.index] * box[k.y.index], changed);
            } else if constexpr (std::is_same_v<T, cons::ExplicitEq>) {
              UnivariateFn fn = f.univariate(k.f);
              if (const Poly1* p = fn.polynomial()) return narrow(box[k.y.index], p->eval_interval(box[k.x.index]), changed);
              return fn.residual_interval(box[k.x.index], box[k.y.index]).contains_zero();
            } else if constexpr (std::is_same_v<T, cons::ExplicitGeq>) {
              return f.univariate(k.f).residual_interval(box[k.x.index], box[k.y.index]).hi >= 0;
            } else if constexpr (std::is_same_v<T, cons::ExplicitLeq>) {
              return f.univariate(k.f).residual_interval(box[k.x.index], box[k.y.index]).lo <= 0;
            } else if constexpr (std::is_same_v<T, cons::ImplicitEq>) {
              return f.bivariate(k.f).eval_interval(box[k.x.index], box[k.y.index]).contains_zero();
            } else {
              static_assert(std::is_same_v<T, cons::ImplicitGeq>);
              return f.bivariate(k.f).eval_interval(box[k.x.index], box[k.y.index]).hi >= 0;
            }
          },
          c);
      if (!ok) return false;
    }
    if (!changed) break;
  }
  return true;
}

}  // namespace

SearchResult branch_and_prune(const Formula& f, const PruneOptions& opt) {
  if (f.num_vars() > opt.max_vars)
    throw Error(Errc::BudgetExceeded,
                std::to_string(f.num_vars()) + " variables exceed the branch-and-prune limit of " +
                    std::to_string(opt.max_vars));
  SearchResult result;
  const Rational min_width = f.delta() / pow(Rational(2), static_cast<unsigned>(opt.max_depth));
  std::vector<Box> stack{Box(f.num_vars(), RInterval(Rational(-f.delta()), f.delta()))};
  bool undecided = false;
  while (!stack.empty()) {
    if (++result.nodes > opt.max_boxes) {
      undecided = true;
      break;
    }
    Box box = std::move(stack.back());
    stack.pop_back();
    if (!contract(f, box, opt.relax_eps)) continue;

    // Candidate: box midpoints for variables not forced by propagation.
    Assignment cand(f.num_vars());
    for (std::uint32_t i = 0; i < f.num_vars(); ++i) {
      propagate(f, cand);
      if (!cand.has(Var{i})) cand.set(Var{i}, box[i].mid());
    }
    propagate(f, cand);
    ViolationReport rep = opt.relax_eps ? check_relaxed(f, cand, *opt.relax_eps) : check_exact(f, cand);
    if (rep.ok()) {
      result.kind = SearchKind::FoundWitness;
      result.witness = cand;
      result.best = cand;
      result.best_margin = 0;
      return result;
    }
    if (!result.best_margin || rep.worst_margin < *result.best_margin) {
      result.best = cand;
      result.best_margin = rep.worst_margin;
    }

    std::size_t widest = 0;
    for (std::size_t i = 1; i < box.size(); ++i)
      if (box[i].width() > box[widest].width()) widest = i;
    if (box.empty() || box[widest].width() <= min_width) {
      undecided = true;
      continue;
    }
    Rational m = box[widest].mid();
    Box left = box, right = std::move(box);
    left[widest].hi = m;
    right[widest].lo = m;
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  result.kind = undecided ? SearchKind::Exhausted : SearchKind::CertifiedEmpty;
  return result;
}

// ------------------------------------------------------------------ harness

std::string HarnessReport::to_text() const {
  std::ostringstream o;
  auto dir = [&](const char* label, const DirectionReport& d) {
    o << label << ": " << (d.passed ? "pass" : "FAIL") << " search=" << d.search
      << " witness=" << (d.witness_found ? "yes" : "no") << " checked=" << (d.checked ? "yes" : "no");
    if (!d.detail.empty()) o << " (" << d.detail << ")";
    o << "\n";
  };
  dir("forward", forward);
  dir("backward", backward);
  if (source_prune) o << "source branch-and-prune: " << search_kind_name(*source_prune) << "\n";
  if (target_prune) o << "target branch-and-prune: " << search_kind_name(*target_prune) << "\n";
  return o.str();
}

HarnessReport equisat_harness(const Formula& source, const ReductionOutput& r, const HarnessOptions& opt) {
  HarnessReport rep;
  std::optional<Assignment> forward_q;

  auto search = [&](const Formula& f, DirectionReport& d) -> std::optional<SearchResult> {
    try {
      SearchResult s = grid_search(f, opt.grid);
      d.search = std::string("grid:") + search_kind_name(s.kind);
      return s;
    } catch (const Error& e) {
      if (e.code() != Errc::BudgetExceeded) throw;
      d.search = "grid:inconclusive";
      return std::nullopt;
    }
  };
  auto prune = [&](const Formula& f) -> std::optional<SearchKind> {
    if (f.num_vars() > opt.prune.max_vars) return std::nullopt;
    return branch_and_prune(f, opt.prune).kind;
  };

  // Forward: source witness -> target witness, always an exact guarantee.
  auto src = search(source, rep.forward);
  if (src && src->kind == SearchKind::FoundWitness) {
    rep.forward.witness_found = true;
    if (!r.witness.forward_available()) {
      rep.forward.detail = "forward map not evaluable: " + *r.witness.forward_unavailable;
    } else {
      Assignment q = r.witness.forward(*src->witness);
      ViolationReport vr = check_exact(r.target, q);
      rep.forward.checked = true;
      rep.forward.passed = vr.ok();
      if (!vr.ok()) rep.forward.detail = vr.to_text(r.target);
      forward_q = std::move(q);
    }
  } else {
    rep.source_prune = prune(source);
  }

  // Backward: target witness -> source witness under the map's guarantee.
  auto tgt = search(r.target, rep.backward);
  std::optional<Assignment> q;
  if (tgt && tgt->kind == SearchKind::FoundWitness) {
    q = tgt->witness;
  } else if (forward_q) {
    q = forward_q;
    rep.backward.search += "+forward-map";
  } else {
    rep.target_prune = prune(r.target);
  }
  if (q) {
    rep.backward.witness_found = true;
    auto [p, g] = r.witness.backward(*q);
    ViolationReport vr = check_with(source, p, g);
    rep.backward.checked = true;
    rep.backward.passed = vr.ok();
    rep.backward.detail = "guarantee " + g.to_string();
    if (!vr.ok()) rep.backward.detail += "; " + vr.to_text(source);
  }
  if (rep.source_prune && rep.target_prune && *rep.source_prune != *rep.target_prune &&
      *rep.source_prune != SearchKind::Exhausted && *rep.target_prune != SearchKind::Exhausted) {
    rep.backward.passed = false;
    rep.backward.detail += "source and target emptiness disagree";
  }
  return rep;
}

}  // namespace ccsp
