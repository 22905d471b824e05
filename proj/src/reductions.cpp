#include "ccsp/reductions.hpp"

#include "ccsp/error.hpp"
#include "ccsp/formula_io.hpp"
#include "ccsp/verifier.hpp"

#include <algorithm>

namespace ccsp {

std::uint64_t sound_chain_length(std::uint64_t M) {
  // 2^(-2^L) <= 2^(-2^M) / 100  <=>  2^L - 2^M >= 7, and 2^(-2^L) <= 1/100  <=>  2^L >= 7.
  if (M >= 3) return M + 1;
  const std::uint64_t tm = std::uint64_t{1} << M;
  std::uint64_t L = 1;
  while ((std::uint64_t{1} << L) < tm + 7 || (std::uint64_t{1} << L) < 7) ++L;
  return L;
}

// ------------------------------------------------------------------ PassBuilder

PassBuilder::PassBuilder(const Formula& src) : src_(src) {}

Var PassBuilder::var(const std::string& name, ForwardEval eval) {
  Var v = fb_.add_fresh_var(name);
  evals_.push_back(std::move(eval));
  return v;
}

Var PassBuilder::copy(Var s) {
  return var(src_.name(s), [s](const Assignment& src, const Assignment&) { return src.at(s); });
}

Var PassBuilder::zero() {
  if (!zero_) {
    zero_ = var("[0]", [](const Assignment&, const Assignment&) { return Rational(0); });
    add(cons::Add{*zero_, *zero_, *zero_});
  }
  return *zero_;
}

void PassBuilder::equal(Var a, Var b) { add(cons::Add{a, zero(), b}); }

Var PassBuilder::sum(Var a, Var b, const std::string& name) {
  Var v = var(name, [a, b](const Assignment&, const Assignment& t) { return Rational(t.at(a) + t.at(b)); });
  add(cons::Add{a, b, v});
  return v;
}

Var PassBuilder::diff(Var a, Var b, const std::string& name) {
  Var v = var(name, [a, b](const Assignment&, const Assignment& t) { return Rational(t.at(a) - t.at(b)); });
  add(cons::Add{v, b, a});
  return v;
}

Var PassBuilder::scaled(Var y, const Rational& q, const std::string& name) {
  Var x = var(name, [y, q](const Assignment&, const Assignment& t) { return Rational(q * t.at(y)); });
  scalar_multiple(*this, x, y, q);
  return x;
}

FnId PassBuilder::function(const std::string& name, const UnivariateFn& f) {
  if (!f.is_polynomial()) unavailable("function '" + name + "' is an implicit branch without exact values");
  if (const Poly1* p = f.polynomial()) return fb_.intern_function(name, *p);
  return fb_.intern_function(name, *f.branch());
}

FnId PassBuilder::function(const std::string& name, const Poly2& f) { return fb_.intern_function(name, f); }

ReductionOutput PassBuilder::finish(const std::string& pass,
                                    std::function<std::pair<Assignment, Guarantee>(const Assignment&)> backward) {
  ReductionOutput out;
  out.target = fb_.build();
  out.witness.forward_evals = std::move(evals_);
  out.witness.forward_unavailable = unavailable_;
  out.witness.backward_fn = std::move(backward);
  out.provenance = std::move(prov_);
  out.provenance.pass = pass;
  out.provenance.source = stats(src_);
  out.provenance.target = stats(out.target);
  out.landmarks = std::move(landmarks_);
  return out;
}

Assignment project(const Assignment& tgt, std::size_t n) {
  Assignment p(n);
  for (std::uint32_t i = 0; i < n; ++i) p.set(Var{i}, tgt.at(Var{i}));
  return p;
}

namespace {

std::function<std::pair<Assignment, Guarantee>(const Assignment&)> projection(std::size_t n) {
  return [n](const Assignment& q) { return std::make_pair(project(q, n), Guarantee::exact()); };
}

void require_tag(const Formula& f, SignatureKind k, const char* pass) {
  if (f.tag().kind != k)
    throw Error(Errc::SignatureError, std::string(pass) + " expects " + signature_name(k) + ", got " + tag_to_string(f));
}

/// Emits constraints making `out` (fresh, or `target` if given) equal k * w for an integer k >= 1.
Var emit_multiple(PassBuilder& b, Var w, Integer k, std::optional<Var> target, const std::string& stem) {
  if (k == 1) {
    if (!target) return w;
    b.equal(w, *target);
    return *target;
  }
  // Doubling ladder p_i = 2^i w, then the set bits are summed from the lowest up.
  std::vector<Var> powers{w};
  std::size_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
  for (std::size_t i = 1; i < bits; ++i) {
    Var prev = powers.back();
    bool last = i + 1 == bits && mpz_popcount(k.get_mpz_t()) == 1;
    if (last && target) {
      b.add(cons::Add{prev, prev, *target});
      powers.push_back(*target);
    } else {
      powers.push_back(b.sum(prev, prev, stem + "*2^" + std::to_string(i)));
    }
  }
  if (mpz_popcount(k.get_mpz_t()) == 1) return powers.back();
  std::vector<Var> terms;
  for (std::size_t i = 0; i < bits; ++i)
    if (mpz_tstbit(k.get_mpz_t(), i)) terms.push_back(powers[i]);
  Var acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) {
    if (i + 1 == terms.size() && target) {
      b.add(cons::Add{acc, terms[i], *target});
      acc = *target;
    } else {
      acc = b.sum(acc, terms[i], stem + "+" + std::to_string(i));
    }
  }
  return acc;
}

}  // namespace

void scalar_multiple(PassBuilder& b, Var x, Var y, const Rational& q) {
  const std::string stem = "[" + b.formula().peek().name(y) + "*" + to_string(q) + "]";
  if (q == 0) {
    Var z = b.zero();
    b.add(cons::Add{x, z, z});
    return;
  }
  Integer num = abs(q.get_num()), den = q.get_den();
  // w = y / den, enforced by den * w = y.
  Var w = y;
  if (den != 1) {
    Rational inv(1, den);
    w = b.var(stem + "/" + den.get_str(), [y, inv](const Assignment&, const Assignment& t) {
      return Rational(inv * t.at(y));
    });
    emit_multiple(b, w, den, y, stem + "w");
  }
  if (q > 0) {
    emit_multiple(b, w, num, x, stem + "m");
  } else {
    Var m = emit_multiple(b, w, num, std::nullopt, stem + "m");
    b.add(cons::Add{x, m, b.zero()});
  }
}

// ------------------------------------------------------------------ ami -> square1

ReductionOutput ami_to_square1(const Formula& src) {
  require_tag(src, SignatureKind::AmiHalf, "ami2sq");
  PassBuilder b(src);
  b.formula().set_tag({SignatureKind::Square1, {}, {}, {}}).set_delta(1);
  const std::size_t n = src.num_vars();
  for (std::uint32_t i = 0; i < n; ++i) b.copy(Var{i});
  Var one = b.var("[1]", [](const Assignment&, const Assignment&) { return Rational(1); });
  b.add(cons::EqConst{one, 1});
  for (std::size_t k = 0; k < src.constraints().size(); ++k) {
    const Constraint& c = src.constraints()[k];
    const std::string at = "@" + std::to_string(k);
    if (const auto* a = std::get_if<cons::Add>(&c)) {
      b.add(*a);
    } else if (const auto* nn = std::get_if<cons::Nonneg>(&c)) {
      b.add(*nn);
    } else if (const auto* e = std::get_if<cons::EqConst>(&c)) {
      if (e->value != Rational(1, 2))
        throw Error(Errc::SignatureError, "ami2sq: constant " + to_string(e->value) + " is not 1/2");
      b.add(cons::Add{e->x, e->x, one});
    } else if (const auto* m = std::get_if<cons::Mul>(&c)) {
      const Var x = m->x, y = m->y, z = m->z;
      const std::string nx = src.name(x), ny = src.name(y);
      auto sq = [](Var v) {
        return [v](const Assignment&, const Assignment& t) { return Rational(t.at(v) * t.at(v)); };
      };
      Var x2 = b.var("[" + nx + "^2]" + at, sq(x));
      Var y2 = b.var("[" + ny + "^2]" + at, sq(y));
      Var s = b.var("[" + nx + "+" + ny + "]" + at,
                    [x, y](const Assignment&, const Assignment& t) { return Rational(t.at(x) + t.at(y)); });
      Var s2 = b.var("[(" + nx + "+" + ny + ")^2]" + at, sq(s));
      auto prod = [x, y](const Assignment&, const Assignment& t) { return Rational(t.at(x) * t.at(y)); };
      Var a = b.var("[" + nx + "^2+2" + nx + ny + "]" + at, [x2, prod](const Assignment& sa, const Assignment& t) {
        return Rational(t.at(x2) + 2 * prod(sa, t));
      });
      Var two = b.var("[2" + nx + ny + "]" + at, [prod](const Assignment& sa, const Assignment& t) {
        return Rational(2 * prod(sa, t));
      });
      Var xy = b.var("[" + nx + ny + "]" + at, prod);
      b.add(cons::Square{x, x2});
      b.add(cons::Square{y, y2});
      b.add(cons::Add{x, y, s});
      b.add(cons::Square{s, s2});
      b.add(cons::Add{a, y2, s2});
      b.add(cons::Add{x2, two, a});
      b.add(cons::Add{xy, xy, two});
      // [xy] = z, stated through [2xy] = z + [xy].
      b.add(cons::Add{z, xy, two});
    } else {
      throw Error(Errc::SignatureError, std::string("ami2sq: constraint '") + keyword(c) + "' not in AMI_HALF");
    }
  }
  return b.finish("ami2sq", projection(n));
}

// ------------------------------------------------------------------ square1 -> ce_expl / cci_expl

namespace {

void check_square1_source(const Formula& src, const char* pass) {
  require_tag(src, SignatureKind::Square1, pass);
  for (const auto& c : src.constraints()) {
    bool ok = std::holds_alternative<cons::Add>(c) || std::holds_alternative<cons::Nonneg>(c) ||
              std::holds_alternative<cons::Square>(c) ||
              (std::holds_alternative<cons::EqConst>(c) && std::get<cons::EqConst>(c).value == 1);
    if (!ok) throw Error(Errc::SignatureError, std::string(pass) + ": constraint not in SQUARE1");
  }
}

void check_near_square(const UnivariateFn& f, const Rational& delta, const char* which) {
  if (delta >= Rational(1, 4) || delta <= 0)
    throw Error(Errc::DeltaTooLarge, "delta = " + to_string(delta) + " must lie in (0, 1/4)");
  if (f.value_at_zero() != 0) throw Error(Errc::ShapeError, std::string(which) + " must vanish at 0");
  Rational c = near_squaring_bound(f, delta);
  if (c > Rational(1, 10))
    throw Error(Errc::NearSquaringTooLoose,
                std::string(which) + ": near-squaring bound " + to_string(c) + " exceeds 1/10 on [-delta, delta]");
}

struct Chain {
  std::uint64_t L = 0;
  std::uint64_t M = 0;
  bool test = false;
};

Chain chain_length(const Formula& src, const ChainMode& mode) {
  Chain ch;
  ch.M = lemma_approx_M(src).M;
  if (mode.test_L) {
    if (*mode.test_L < 1) throw Error(Errc::InvalidArgument, "test-mode chain length must be positive");
    ch.L = *mode.test_L;
    ch.test = true;
  } else {
    ch.L = sound_chain_length(ch.M);
  }
  return ch;
}

void check_test_eps(const Rational& eps, const Rational& delta) {
  if (eps <= 0 || eps > delta / 100 || eps > Rational(1, 100))
    throw Error(Errc::InvalidArgument,
                "test-mode chain too short: realized eps = " + to_string(eps) + " exceeds min(delta, 1)/100");
}

Rational realized_chain(const UnivariateFn& step, const Rational& delta, std::uint64_t L) {
  Rational d = delta;
  for (std::uint64_t i = 0; i < L; ++i) d = step.eval_exact(d);
  return d;
}

/// Per-variable [eps*x] with -eps <= [eps*x] <= eps.
std::vector<Var> scaled_vars(PassBuilder& b, const Formula& src, Var eps) {
  std::vector<Var> ex;
  for (std::uint32_t i = 0; i < src.num_vars(); ++i) {
    Var s{i};
    const std::string nm = src.name(s);
    Var v = b.var("[eps*" + nm + "]",
                  [s, eps](const Assignment& sa, const Assignment& t) { return Rational(t.at(eps) * sa.at(s)); });
    Var lo = b.sum(v, eps, "[eps*" + nm + "+eps]");
    b.add(cons::Nonneg{lo});
    Var hi = b.var("[eps-eps*" + nm + "]",
                   [v, eps](const Assignment&, const Assignment& t) { return Rational(t.at(eps) - t.at(v)); });
    b.add(cons::Add{v, hi, eps});
    b.add(cons::Nonneg{hi});
    ex.push_back(v);
  }
  return ex;
}

ForwardEval apply(const UnivariateFn& f, Var x) {
  return [f, x](const Assignment&, const Assignment& t) { return f.eval_exact(t.at(x)); };
}

std::function<std::pair<Assignment, Guarantee>(const Assignment&)> unscale(std::vector<Var> ex, Var eps) {
  return [ex = std::move(ex), eps](const Assignment& q) {
    Assignment p(ex.size());
    const Rational& e = q.at(eps);
    if (e == 0) throw Error(Errc::InvalidArgument, "backward map needs eps != 0");
    for (std::uint32_t i = 0; i < ex.size(); ++i) p.set(Var{i}, Rational(q.at(ex[i]) / e));
    return std::make_pair(std::move(p), Guarantee::relaxed(100 * e));
  };
}

void record_chain(PassBuilder& b, const Chain& ch) {
  b.provenance().param("mode", ch.test ? "test" : "sound");
  b.provenance().param("M", std::to_string(ch.M));
  b.provenance().param("L", std::to_string(ch.L));
  if (!ch.test && ch.L > 8) b.unavailable("sound-mode chain of length " + std::to_string(ch.L) + " is not expandable");
}

}  // namespace

ReductionOutput square1_to_ce_expl(const Formula& src, const UnivariateFn& f, const Rational& delta,
                                   const ChainMode& mode) {
  check_square1_source(src, "sq2ce");
  check_near_square(f, delta, "f");
  Chain ch = chain_length(src, mode);
  if (ch.test && f.is_polynomial()) check_test_eps(realized_chain(f, delta, ch.L), delta);

  PassBuilder b(src);
  FnId fid = b.function("f", f);
  b.formula().set_tag({SignatureKind::CeExpl, fid, {}, {}}).set_delta(delta);
  record_chain(b, ch);

  b.zero();
  Var d = b.var("[delta_0]", [delta](const Assignment&, const Assignment&) { return delta; });
  b.add(cons::EqConst{d, delta});
  for (std::uint64_t i = 1; i <= ch.L; ++i) {
    Var next = b.var("[delta_" + std::to_string(i) + "]", apply(f, d));
    b.add(cons::ExplicitEq{d, next, fid});
    d = next;
  }
  const Var eps = d;
  Var fe = b.var("[f(eps)]", apply(f, eps));
  b.add(cons::ExplicitEq{eps, fe, fid});
  Var s = b.sum(eps, fe, "[eps+f(eps)]");
  Var fs = b.var("[f(eps+f(eps))]", apply(f, s));
  b.add(cons::ExplicitEq{s, fs, fid});
  Var approx = b.diff(fs, fe, "[~2eps^3]");
  Var approx2 = b.sum(approx, approx, "[2*~2eps^3]");
  b.landmarks()["eps"] = eps;
  b.landmarks()["2eps3"] = approx;

  std::vector<Var> ex = scaled_vars(b, src, eps);
  for (std::size_t k = 0; k < src.constraints().size(); ++k) {
    const Constraint& c = src.constraints()[k];
    const std::string at = "@" + std::to_string(k);
    if (const auto* a = std::get_if<cons::Add>(&c)) {
      b.add(cons::Add{ex[a->x.index], ex[a->y.index], ex[a->z.index]});
    } else if (const auto* nn = std::get_if<cons::Nonneg>(&c)) {
      b.add(cons::Nonneg{ex[nn->x.index]});
    } else if (const auto* e = std::get_if<cons::EqConst>(&c)) {
      b.equal(eps, ex[e->x.index]);
    } else {
      const auto& sq = std::get<cons::Square>(c);
      Var ex_ = ex[sq.x.index], ey = ex[sq.y.index];
      auto same = [&](Var v, const std::string& nm) {
        Var t = b.var(nm + at, [v](const Assignment&, const Assignment& tt) { return tt.at(v); });
        b.equal(v, t);
        return t;
      };
      Var t1 = same(eps, "[t1]"), t2 = same(ex_, "[t2]"), t3 = same(ey, "[t3]");
      Var t4 = b.sum(eps, ey, "[t4]" + at);
      Var f1 = b.var("[f(t1)]" + at, apply(f, t1));
      Var f2 = b.var("[f(t2)]" + at, apply(f, t2));
      Var f3 = b.var("[f(t3)]" + at, apply(f, t3));
      Var f4 = b.var("[f(t4)]" + at, apply(f, t4));
      b.add(cons::ExplicitEq{t1, f1, fid});
      b.add(cons::ExplicitEq{t2, f2, fid});
      b.add(cons::ExplicitEq{t3, f3, fid});
      b.add(cons::ExplicitEq{t4, f4, fid});
      Var p = b.sum(f1, f2, "[f1+f2]" + at);
      Var q = b.sum(p, f2, "[f1+2f2]" + at);
      Var r = b.sum(q, f3, "[f1+2f2+f3]" + at);
      Var eta = b.diff(r, f4, "[eta]" + at);
      Var up = b.sum(eta, approx2, "[eta+2A]" + at);
      b.add(cons::Nonneg{up});
      Var down = b.diff(approx2, eta, "[2A-eta]" + at);
      b.add(cons::Nonneg{down});
    }
  }
  return b.finish("sq2ce", unscale(ex, eps));
}

ReductionOutput square1_to_cci_expl(const Formula& src, const UnivariateFn& f, const UnivariateFn& g,
                                    const Rational& delta, const ChainMode& mode) {
  check_square1_source(src, "sq2cci");
  check_near_square(f, delta, "f");
  check_near_square(g, delta, "g");
  Chain ch = chain_length(src, mode);
  if (ch.test && g.is_polynomial()) check_test_eps(realized_chain(g, delta, ch.L), delta);

  PassBuilder b(src);
  FnId fid = b.function("f", f);
  FnId gid = b.function("g", g);
  b.formula().set_tag({SignatureKind::CciExpl, fid, gid, {}}).set_delta(delta);
  record_chain(b, ch);

  b.zero();
  Var d = b.var("[delta_0]", [delta](const Assignment&, const Assignment&) { return delta; });
  b.add(cons::EqConst{d, delta});
  for (std::uint64_t i = 1; i <= ch.L; ++i) {
    const std::string idx = std::to_string(i);
    Var next = b.var("[delta_" + idx + "]", apply(g, d));
    b.add(cons::ExplicitLeq{d, next, gid});
    Var twice = b.sum(next, next, "[2delta_" + idx + "]");
    b.add(cons::ExplicitGeq{d, twice, fid});
    d = next;
  }
  const Var eps = d;
  Var ge = b.var("[<=g(eps)]", apply(g, eps));
  b.add(cons::ExplicitLeq{eps, ge, gid});
  b.add(cons::Nonneg{ge});
  Var s = b.sum(eps, ge, "[eps+<=g(eps)]");
  Var u = b.var("[<=g(eps+<=g(eps))]", apply(g, s));
  b.add(cons::ExplicitLeq{s, u, gid});
  Var v = b.var("[>=f(eps)]", apply(f, eps));
  b.add(cons::ExplicitGeq{eps, v, fid});
  Var bound = b.diff(u, v, "[<~2eps^3]");
  b.add(cons::Nonneg{bound});
  Var bound2 = b.sum(bound, bound, "[2*<~2eps^3]");
  b.landmarks()["eps"] = eps;
  b.landmarks()["2eps3"] = bound;

  std::vector<Var> ex = scaled_vars(b, src, eps);
  for (std::size_t k = 0; k < src.constraints().size(); ++k) {
    const Constraint& c = src.constraints()[k];
    const std::string at = "@" + std::to_string(k);
    if (const auto* a = std::get_if<cons::Add>(&c)) {
      b.add(cons::Add{ex[a->x.index], ex[a->y.index], ex[a->z.index]});
    } else if (const auto* nn = std::get_if<cons::Nonneg>(&c)) {
      b.add(cons::Nonneg{ex[nn->x.index]});
    } else if (const auto* e = std::get_if<cons::EqConst>(&c)) {
      b.equal(eps, ex[e->x.index]);
    } else {
      const auto& sq = std::get<cons::Square>(c);
      Var ex_ = ex[sq.x.index], ey = ex[sq.y.index];
      auto same = [&](Var w, const std::string& nm) {
        Var t = b.var(nm + at, [w](const Assignment&, const Assignment& tt) { return tt.at(w); });
        b.equal(w, t);
        return t;
      };
      Var t[4] = {same(eps, "[t1]"), same(ex_, "[t2]"), same(ey, "[t3]"), b.sum(eps, ey, "[t4]" + at)};
      Var G[4], F[4];
      for (int i = 0; i < 4; ++i) {
        const std::string idx = std::to_string(i + 1);
        G[i] = b.var("[<=g(t" + idx + ")]" + at, apply(g, t[i]));
        b.add(cons::ExplicitLeq{t[i], G[i], gid});
        F[i] = b.var("[>=f(t" + idx + ")]" + at, apply(f, t[i]));
        b.add(cons::ExplicitGeq{t[i], F[i], fid});
      }
      // eta_low = G1 + 2 G2 + G3 - F4 >= -2B
      Var lo = b.diff(b.sum(b.sum(b.sum(G[0], G[1], "[G1+G2]" + at), G[1], "[G1+2G2]" + at), G[2], "[G1+2G2+G3]" + at),
                      F[3], "[eta_low]" + at);
      b.add(cons::Nonneg{b.sum(lo, bound2, "[eta_low+2B]" + at)});
      // eta_high = F1 + 2 F2 + F3 - G4 <= 2B
      Var hi = b.diff(b.sum(b.sum(b.sum(F[0], F[1], "[F1+F2]" + at), F[1], "[F1+2F2]" + at), F[2], "[F1+2F2+F3]" + at),
                      G[3], "[eta_high]" + at);
      b.add(cons::Nonneg{b.diff(bound2, hi, "[2B-eta_high]" + at)});
    }
  }
  return b.finish("sq2cci", unscale(ex, eps));
}

// ------------------------------------------------------------------ rescale / normalize

CubicRescale rescale_cubic(const UnivariateFn& f, const UnivariateFn& g, const Rational& r) {
  CubicRescale out;
  out.c = std::max(near_squaring_bound(f, r), near_squaring_bound(g, r));
  out.N = floor_plus_one(10 * out.c);
  out.f_star = f.rescaled(Rational(out.N));
  out.g_star = g.rescaled(Rational(out.N));
  return out;
}

namespace {

void require_functions(const Formula& src, const UnivariateFn& f_expected, const UnivariateFn& g_expected,
                       const char* pass) {
  require_tag(src, SignatureKind::CciExpl, pass);
  if (!(src.univariate(*src.tag().f) == f_expected) || !(src.univariate(*src.tag().g) == g_expected))
    throw Error(Errc::SignatureError, std::string(pass) + ": source functions do not match the expected f*, g*");
}

}  // namespace

ReductionOutput cubic_rescale_pass(const Formula& src, const UnivariateFn& f, const UnivariateFn& g,
                                   const Integer& N) {
  const Rational n(N);
  require_functions(src, f.rescaled(n), g.rescaled(n), "cubic-rescale");
  PassBuilder b(src);
  FnId fid = b.function("f", f);
  FnId gid = b.function("g", g);
  b.formula().set_tag({SignatureKind::CciExpl, fid, gid, {}}).set_delta(src.delta());
  b.provenance().param("N", N.get_str());
  const std::size_t count = src.num_vars();
  for (std::uint32_t i = 0; i < count; ++i) b.copy(Var{i});
  std::map<std::uint32_t, Var> over_n, over_n2;
  auto div = [&](std::map<std::uint32_t, Var>& cache, Var x, const Rational& q, const std::string& label) {
    auto it = cache.find(x.index);
    if (it != cache.end()) return it->second;
    Var v = b.scaled(x, q, "[" + src.name(x) + label + "]");
    cache.emplace(x.index, v);
    return v;
  };
  for (const auto& c : src.constraints()) {
    if (const auto* ge = std::get_if<cons::ExplicitGeq>(&c)) {
      b.add(cons::ExplicitGeq{div(over_n, ge->x, 1 / n, "/N"), div(over_n2, ge->y, 1 / (n * n), "/N^2"), fid});
    } else if (const auto* le = std::get_if<cons::ExplicitLeq>(&c)) {
      b.add(cons::ExplicitLeq{div(over_n, le->x, 1 / n, "/N"), div(over_n2, le->y, 1 / (n * n), "/N^2"), gid});
    } else {
      b.add(c);
    }
  }
  return b.finish("cubic-rescale", projection(count));
}

TaylorParams taylor_entry(const UnivariateFn& f, const UnivariateFn& g) {
  auto [a, b] = f.taylor();
  auto [c, d] = g.taylor();
  return {a, b, c, d};
}

LinearNormalization normalize_linear(const UnivariateFn& f, const UnivariateFn& g) {
  if (f.value_at_zero() != 0 || g.value_at_zero() != 0)
    throw Error(Errc::ShapeError, "normalize_linear needs f(0) = g(0) = 0");
  LinearNormalization out;
  out.params = taylor_entry(f, g);
  const auto& p = out.params;
  if (p.b <= 0 || p.d <= 0)
    throw Error(Errc::CurvatureSignError, "normalize_linear needs f''(0) > 0 and g''(0) > 0 (b = " + to_string(p.b) +
                                              ", d = " + to_string(p.d) + ")");
  out.f_star = f.normalized(p.a, p.b);
  out.g_star = g.normalized(p.c, p.d);
  out.K = 1 + abs(p.a) + abs(p.b) + abs(p.c) + abs(p.d);
  return out;
}

ReductionOutput linear_normalize_pass(const Formula& src, const UnivariateFn& f, const UnivariateFn& g) {
  LinearNormalization ln = normalize_linear(f, g);
  require_functions(src, ln.f_star, ln.g_star, "linear-normalize");
  const TaylorParams& p = ln.params;
  const Rational delta = src.delta(), delta2 = ln.K * delta;
  PassBuilder b(src);
  FnId fid = b.function("f", f);
  FnId gid = b.function("g", g);
  b.formula().set_tag({SignatureKind::CciExpl, fid, gid, {}}).set_delta(delta2);
  for (const auto& [k, v] : {std::pair{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}}) b.provenance().param(k, to_string(v));
  b.provenance().param("delta'", to_string(delta2));
  const std::size_t count = src.num_vars();
  for (std::uint32_t i = 0; i < count; ++i) b.copy(Var{i});
  Var dp = b.var("[delta']", [delta2](const Assignment&, const Assignment&) { return delta2; });
  b.add(cons::EqConst{dp, delta2});
  Var dv = b.scaled(dp, 1 / ln.K, "[delta]");
  auto combine = [&](Var x, Var y, const Rational& lin, const Rational& quad, const char* tag) {
    std::string stem = std::string("[") + tag + src.name(x) + "," + src.name(y) + "]";
    Var ax = b.scaled(x, lin, stem + "x");
    Var by = b.scaled(y, quad, stem + "y");
    return b.sum(ax, by, stem);
  };
  for (const auto& c : src.constraints()) {
    if (const auto* ge = std::get_if<cons::ExplicitGeq>(&c)) {
      b.add(cons::ExplicitGeq{ge->x, combine(ge->x, ge->y, p.a, p.b, "ax+by:"), fid});
    } else if (const auto* le = std::get_if<cons::ExplicitLeq>(&c)) {
      b.add(cons::ExplicitLeq{le->x, combine(le->x, le->y, p.c, p.d, "cx+dy:"), gid});
    } else if (const auto* e = std::get_if<cons::EqConst>(&c)) {
      if (e->value != delta) throw Error(Errc::SignatureError, "linear-normalize: constant is not delta");
      b.equal(dv, e->x);
    } else {
      b.add(c);
    }
  }
  return b.finish("linear-normalize", projection(count));
}

// ------------------------------------------------------------------ cci_expl -> ce_expl

ReductionOutput cci_expl_to_ce_expl(const Formula& src) {
  require_tag(src, SignatureKind::CciExpl, "cci2ce");
  UnivariateFn f = src.univariate(*src.tag().f), g = src.univariate(*src.tag().g);
  if (!(f == g)) throw Error(Errc::SignatureError, "cci2ce needs f = g, got " + f.describe() + " and " + g.describe());
  PassBuilder b(src);
  FnId fid = b.function(src.function(*src.tag().f).name, f);
  b.formula().set_tag({SignatureKind::CeExpl, fid, {}, {}}).set_delta(src.delta());
  const std::size_t count = src.num_vars();
  for (std::uint32_t i = 0; i < count; ++i) b.copy(Var{i});
  for (std::size_t k = 0; k < src.constraints().size(); ++k) {
    const Constraint& c = src.constraints()[k];
    const std::string at = "@" + std::to_string(k);
    auto image = [&](Var x) {
      Var fx = b.var("[f(" + src.name(x) + ")]" + at, apply(f, x));
      b.add(cons::ExplicitEq{x, fx, fid});
      return fx;
    };
    if (const auto* ge = std::get_if<cons::ExplicitGeq>(&c)) {
      Var fx = image(ge->x);
      b.add(cons::Nonneg{b.diff(ge->y, fx, "[" + src.name(ge->y) + "-f]" + at)});
    } else if (const auto* le = std::get_if<cons::ExplicitLeq>(&c)) {
      Var fx = image(le->x);
      b.add(cons::Nonneg{b.diff(fx, le->y, "[f-" + src.name(le->y) + "]" + at)});
    } else {
      b.add(c);
    }
  }
  return b.finish("cci2ce", projection(count));
}

// ------------------------------------------------------------------ implicit forms

Poly2 oriented(const Poly2& F, const Orientation& o) {
  Poly2 p = o.swap ? F.swapped() : F;
  return o.flip ? p.reflected() : p;
}

UnivariateFn explicit_of(const Poly2& F) {
  if (auto p = F.graph_form()) return *p;
  return BranchFn{F, 0, 1, 1};
}

namespace {

bool is_explicit_branch(const UnivariateFn& f, const Poly2& F) {
  if (const Poly1* p = f.polynomial()) return F.coeff(0, 1) != 0 && F.substitute_y(*p).is_zero();
  const BranchFn& br = *f.branch();
  return br.curve == F && br.lin == 0 && br.quad == 1 && br.scale == 1;
}

}  // namespace

ReductionOutput explicit_to_implicit(const Formula& src, const Poly2& F, const Poly2* G) {
  const bool cci = src.tag().kind == SignatureKind::CciExpl;
  if (!cci) require_tag(src, SignatureKind::CeExpl, "implicit");
  if (cci && !G) throw Error(Errc::SignatureError, "implicit: CCI_EXPL source needs two curves");
  OriginJet jf = origin_jet(F);
  CurvatureReport cf = classify_curvature(F);
  if (cci) {
    CurvatureReport cg = classify_curvature(*G);
    OriginJet jg = origin_jet(*G);
    if (cf.classification != Curvature::ConvexlyCurved || jf.fy() <= 0)
      throw Error(Errc::CurvatureSignError, "implicit: F must be convexly curved with F_y > 0");
    if (cg.classification != Curvature::ConcavelyCurved || jg.fy() >= 0)
      throw Error(Errc::CurvatureSignError, "implicit: G must be concavely curved with G_y < 0");
  } else {
    if (cf.classification == Curvature::Flat) throw Error(Errc::CurvatureSignError, "implicit: F is not curved");
    if (jf.fy() == 0) throw Error(Errc::CurvatureSignError, "implicit: F_y(0,0) = 0, swap the variables first");
  }
  if (!is_explicit_branch(src.univariate(*src.tag().f), F) ||
      (cci && !is_explicit_branch(src.univariate(*src.tag().g), *G)))
    throw Error(Errc::SignatureError, "implicit: source functions are not the explicit branches of the given curves");

  PassBuilder b(src);
  FnId Fid = b.function("F", F);
  std::optional<FnId> Gid;
  if (cci) Gid = b.function("G", *G);
  b.formula().set_tag({cci ? SignatureKind::Cci : SignatureKind::Ce, Fid, Gid, {}}).set_delta(src.delta());
  const RInterval box(Rational(-src.delta()), src.delta());
  if (!certify_fy_sign(F, box, box)) b.provenance().warnings.push_back("F_y sign not certified on [-delta, delta]^2");
  if (cci && !certify_fy_sign(*G, box, box))
    b.provenance().warnings.push_back("G_y sign not certified on [-delta, delta]^2");

  const std::size_t count = src.num_vars();
  for (std::uint32_t i = 0; i < count; ++i) b.copy(Var{i});
  for (const auto& c : src.constraints()) {
    if (const auto* e = std::get_if<cons::ExplicitEq>(&c))
      b.add(cons::ImplicitEq{e->x, e->y, Fid});
    else if (const auto* ge = std::get_if<cons::ExplicitGeq>(&c))
      b.add(cons::ImplicitGeq{ge->x, ge->y, Fid});
    else if (const auto* le = std::get_if<cons::ExplicitLeq>(&c))
      b.add(cons::ImplicitGeq{le->x, le->y, *Gid});
    else
      b.add(c);
  }
  return b.finish("implicit", projection(count));
}

ReductionOutput signflip_wrap(const Formula& src, const Poly2& F, const Orientation& of, const Poly2* G,
                              const Orientation& og) {
  const bool cci = src.tag().kind == SignatureKind::Cci;
  if (!cci) require_tag(src, SignatureKind::Ce, "signflip");
  if (cci && !G) throw Error(Errc::SignatureError, "signflip: CCI source needs two curves");
  const Poly2 Fw = oriented(F, of);
  if (!(src.bivariate(*src.tag().f) == Fw))
    throw Error(Errc::SignatureError, "signflip: source F does not match the oriented curve");
  std::optional<Poly2> Gw;
  if (cci) {
    Gw = oriented(*G, og);
    if (!(src.bivariate(*src.tag().g) == *Gw))
      throw Error(Errc::SignatureError, "signflip: source G does not match the oriented curve");
  }
  for (const auto& [P, o] : {std::pair{&F, of}, std::pair{G, og}}) {
    if (!P || !o.flip) continue;
    OriginJet a = origin_jet(o.swap ? P->swapped() : *P), r = origin_jet(oriented(*P, o));
    if (r.a10 != -a.a10 || r.a01 != -a.a01 || r.a20 != a.a20 || r.a11 != a.a11 || r.a02 != a.a02)
      throw std::logic_error("reflection changed the second-order jet");
  }

  PassBuilder b(src);
  FnId Fid = b.function("F", F);
  std::optional<FnId> Gid;
  if (cci) Gid = b.function("G", *G);
  b.formula().set_tag({cci ? SignatureKind::Cci : SignatureKind::Ce, Fid, Gid, {}}).set_delta(src.delta());
  b.provenance().param("F.swap", of.swap ? "1" : "0");
  b.provenance().param("F.flip", of.flip ? "1" : "0");
  if (cci) {
    b.provenance().param("G.swap", og.swap ? "1" : "0");
    b.provenance().param("G.flip", og.flip ? "1" : "0");
  }
  const std::size_t count = src.num_vars();
  for (std::uint32_t i = 0; i < count; ++i) b.copy(Var{i});
  std::map<std::uint32_t, Var> negs;
  auto neg = [&](Var v) {
    auto it = negs.find(v.index);
    if (it != negs.end()) return it->second;
    Var n = b.var("[-" + src.name(v) + "]", [v](const Assignment&, const Assignment& t) { return Rational(-t.at(v)); });
    b.add(cons::Add{v, n, b.zero()});
    negs.emplace(v.index, n);
    return n;
  };
  auto args = [&](Var x, Var y, const Orientation& o) {
    if (o.swap) std::swap(x, y);
    if (o.flip) {
      x = neg(x);
      y = neg(y);
    }
    return std::make_pair(x, y);
  };
  const FnId Fw_id = *src.tag().f;
  for (const auto& c : src.constraints()) {
    if (const auto* e = std::get_if<cons::ImplicitEq>(&c)) {
      auto [x, y] = args(e->x, e->y, of);
      b.add(cons::ImplicitEq{x, y, Fid});
    } else if (const auto* ge = std::get_if<cons::ImplicitGeq>(&c)) {
      bool f_slot = ge->f == Fw_id;
      auto [x, y] = args(ge->x, ge->y, f_slot ? of : og);
      b.add(cons::ImplicitGeq{x, y, f_slot ? Fid : *Gid});
    } else {
      b.add(c);
    }
  }
  return b.finish("signflip", projection(count));
}

// ------------------------------------------------------------------ pipeline

Assignment PipelineResult::forward(const Assignment& src) const {
  Assignment cur = src;
  for (const auto& s : stages) cur = s.witness.forward(cur);
  return cur;
}

namespace {

Orientation orient_for(const Poly2& F, int want_fy_sign) {
  Orientation o;
  OriginJet j = origin_jet(F);
  if (j.fy() == 0) {
    if (j.fx() == 0) throw Error(Errc::NotWellBehaved, "gradient vanishes at the origin");
    o.swap = true;
    j = origin_jet(F.swapped());
  }
  if (want_fy_sign != 0 && sign(j.fy()) != want_fy_sign) o.flip = true;
  return o;
}

}  // namespace

PipelineResult pipeline(const Formula& ami, const PipelineTarget& target, const PipelineOptions& opt) {
  PipelineResult out;
  Provenance& sum = out.summary;
  sum.pass = "pipeline";
  auto push = [&](ReductionOutput r) {
    for (const auto& key : {"L", "M", "N", "a", "b", "c", "d", "delta'"})
      if (auto v = r.provenance.lookup(key)) sum.param(key, *v);
    for (const auto& w : r.provenance.warnings) sum.warnings.push_back(r.provenance.pass + ": " + w);
    out.stages.push_back(std::move(r));
    return std::cref(out.stages.back().target);
  };
  const Formula* cur = &push(ami_to_square1(ami)).get();
  const Rational& delta = opt.delta;

  if (target.kind == SignatureKind::Ce) {
    const Poly2& F = target.F;
    if (classify_curvature(F).classification == Curvature::Flat)
      throw Error(Errc::CurvatureSignError, "CE target " + F.to_string() + " is not curved");
    Orientation o = orient_for(F, 0);
    if (sign(expl_jet(oriented(F, o)).d2) < 0) o.flip = true;
    const Poly2 Fw = oriented(F, o);
    const UnivariateFn phi = explicit_of(Fw);
    auto [a, b2] = phi.taylor();
    bool direct = a == 0 && b2 == 1;
    if (direct) {
      try {
        direct = near_squaring_bound(phi, delta) <= Rational(1, 10);
      } catch (const Error&) {
        direct = false;
      }
    }
    if (direct) {
      cur = &push(square1_to_ce_expl(*cur, phi, delta, opt.mode)).get();
    } else {
      LinearNormalization ln = normalize_linear(phi, phi);
      const Rational inner = delta / ln.K;
      CubicRescale cr = rescale_cubic(ln.f_star, ln.g_star, inner);
      cur = &push(square1_to_cci_expl(*cur, cr.f_star, cr.g_star, inner, opt.mode)).get();
      if (cr.N != 1) cur = &push(cubic_rescale_pass(*cur, ln.f_star, ln.g_star, cr.N)).get();
      cur = &push(linear_normalize_pass(*cur, phi, phi)).get();
      cur = &push(cci_expl_to_ce_expl(*cur)).get();
    }
    cur = &push(explicit_to_implicit(*cur, Fw)).get();
    if (!o.trivial()) cur = &push(signflip_wrap(*cur, F, o)).get();
    return out;
  }

  if (target.kind != SignatureKind::Cci || !target.G)
    throw Error(Errc::SignatureError, "pipeline target must be CE(F) or CCI(F, G)");
  const Poly2 *C = &target.F, *D = &*target.G;
  Curvature kc = classify_curvature(*C).classification, kd = classify_curvature(*D).classification;
  if (kc == Curvature::ConcavelyCurved && kd == Curvature::ConvexlyCurved) {
    std::swap(C, D);
    std::swap(kc, kd);
  }
  if (kc != Curvature::ConvexlyCurved || kd != Curvature::ConcavelyCurved)
    throw Error(Errc::CurvatureSignError, "CCI target needs one convexly and one concavely curved function");
  const Orientation oc = orient_for(*C, +1), od = orient_for(*D, -1);
  const Poly2 Cw = oriented(*C, oc), Dw = oriented(*D, od);
  const UnivariateFn phi_f = explicit_of(Cw), phi_g = explicit_of(Dw);
  LinearNormalization ln = normalize_linear(phi_f, phi_g);
  const Rational inner = delta / ln.K;
  CubicRescale cr = rescale_cubic(ln.f_star, ln.g_star, inner);
  cur = &push(square1_to_cci_expl(*cur, cr.f_star, cr.g_star, inner, opt.mode)).get();
  if (cr.N != 1) cur = &push(cubic_rescale_pass(*cur, ln.f_star, ln.g_star, cr.N)).get();
  cur = &push(linear_normalize_pass(*cur, phi_f, phi_g)).get();
  cur = &push(explicit_to_implicit(*cur, Cw, &Dw)).get();
  if (!oc.trivial() || !od.trivial()) {
    // signflip_wrap maps the tag's F slot with the first orientation.
    cur = &push(signflip_wrap(*cur, *C, oc, D, od)).get();
  }
  (void)cur;
  return out;
}

// ------------------------------------------------------------------ facts

std::vector<Rational> fact_grid(const Rational& delta, std::size_t n) {
  std::vector<Rational> pts;
  for (std::size_t k = 0; k <= n; ++k) {
    Rational x = -delta + 2 * delta * ratio(static_cast<long>(k), static_cast<long>(n));
    if (x != 0) pts.push_back(x);
  }
  return pts;
}

namespace {

FactCheck grid_fact(const std::string& name, const std::vector<Rational>& grid,
                    const std::function<bool(const Rational&)>& pred) {
  FactCheck fc{name, 0, 0, ""};
  for (const Rational& x : grid) {
    ++fc.checked;
    if (!pred(x)) {
      if (fc.failures == 0) fc.detail = "first failure at x = " + to_string(x);
      ++fc.failures;
    }
  }
  return fc;
}

FactCheck single_fact(const std::string& name, bool ok, const std::string& detail) {
  return {name, 1, ok ? 0u : 1u, detail};
}

bool approx_square(const Poly1& f, const Rational& x) {
  return abs(f.eval(x) - x * x) <= abs(x * x * x) / 10;
}

}  // namespace

std::vector<FactCheck> ce_expl_facts(const Poly1& f, const Rational& delta, unsigned L, std::size_t grid_points) {
  const auto grid = fact_grid(delta, grid_points);
  std::vector<FactCheck> out;
  out.push_back(grid_fact("f_approx_square", grid, [&](const Rational& x) { return approx_square(f, x); }));
  out.push_back(grid_fact("f_bounds", grid, [&](const Rational& x) {
    Rational v = f.eval(x);
    return v > 0 && v <= 2 * x * x;
  }));
  Rational eps = delta;
  for (unsigned i = 0; i < L; ++i) eps = f.eval(eps);
  out.push_back(single_fact("eps_bound", eps > 0 && eps <= delta / 100 && eps <= Rational(1, 100),
                            "eps = " + to_string(eps)));
  Rational fe = f.eval(eps);
  out.push_back(single_fact("feps_bound", fe < eps, "f(eps) = " + to_string(fe)));
  Rational gap = f.eval(Rational(eps + fe)) - fe, e3 = eps * eps * eps;
  out.push_back(single_fact("eps_cubed_approx", e3 <= gap && gap <= 3 * e3,
                            "f(eps+f(eps)) - f(eps) = " + to_string(gap) + ", eps^3 = " + to_string(e3)));
  return out;
}

std::vector<FactCheck> cci_expl_facts(const Poly1& f, const Poly1& g, const Rational& delta, unsigned L,
                                      std::size_t grid_points) {
  const auto grid = fact_grid(delta, grid_points);
  std::vector<FactCheck> out;
  out.push_back(grid_fact("fg_f_approx_square", grid, [&](const Rational& x) { return approx_square(f, x); }));
  out.push_back(grid_fact("fg_g_approx_square", grid, [&](const Rational& x) { return approx_square(g, x); }));
  out.push_back(grid_fact("fg_halff", grid, [&](const Rational& x) { return f.eval(x) / 2 <= g.eval(x); }));
  Rational eps = delta;
  for (unsigned i = 0; i < L; ++i) eps = g.eval(eps);
  out.push_back(single_fact("fg_eps_bound", eps > 0 && eps <= delta / 100 && eps <= Rational(1, 100),
                            "eps = " + to_string(eps)));
  Rational fe = f.eval(eps), ge = g.eval(eps);
  out.push_back(single_fact("fg_fgeps_bound", fe < eps && ge < eps, "f(eps) = " + to_string(fe) + ", g(eps) = " +
                                                                        to_string(ge)));
  Rational B = g.eval(Rational(eps + ge)) - fe, e3 = eps * eps * eps;
  out.push_back(single_fact("fg_2eps_cubed_var", B <= 3 * e3, "B = " + to_string(B)));
  out.push_back(single_fact("fg_leq_eps_cubed", B >= e3, "g(eps+g(eps)) - f(eps) = " + to_string(B)));
  return out;
}

}  // namespace ccsp
