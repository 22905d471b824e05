#include <doctest.h>

#include "ccsp/error.hpp"
#include "ccsp/formula_io.hpp"
#include "ccsp/reductions.hpp"
#include "ccsp/verifier.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace ccsp;

namespace {

Assignment assign(const Formula& f, std::initializer_list<std::pair<const char*, Rational>> vals) {
  Assignment a(f.num_vars());
  for (const auto& [n, v] : vals) a.set(*f.find(n), v);
  return a;
}

}  // namespace

TEST_CASE("exact checks report margins") {
  Formula f = parse_formula("var x; var y; var z\neqc x 1/2\nmul x x y\nadd y y z\nnonneg z\n");
  Assignment good = assign(f, {{"x", Rational(1, 2)}, {"y", Rational(1, 4)}, {"z", Rational(1, 2)}});
  ViolationReport r = check_exact(f, good);
  CHECK(r.ok());
  CHECK(r.per_constraint[3].margin == Rational(1, 2));
  Assignment bad = assign(f, {{"x", Rational(1, 2)}, {"y", Rational(1, 3)}, {"z", Rational(2, 3)}});
  ViolationReport b = check_exact(f, bad);
  CHECK_FALSE(b.ok());
  CHECK(b.violated_count() == 1);
  CHECK(b.per_constraint[1].status == Status::Violated);
  CHECK(b.per_constraint[1].margin == Rational(1, 12));
  CHECK_FALSE(b.to_text(f).empty());
  // Promise radius is informational only.
  Assignment wide = assign(f, {{"x", Rational(1, 2)}, {"y", Rational(1, 4)}, {"z", Rational(1, 2)}});
  CHECK(check_exact(f, wide).promise_ok());
}

TEST_CASE("relaxed checks") {
  Formula f = parse_formula("signature SQUARE1 delta 1\nvar x; var y\nsquare x y\n");
  Assignment a = assign(f, {{"x", Rational(1, 2)}, {"y", Rational(1, 4) + Rational(1, 1000)}});
  CHECK_FALSE(check_exact(f, a).ok());
  CHECK(check_relaxed(f, a, Rational(1, 100)).ok());
  CHECK_FALSE(check_relaxed(f, a, Rational(1, 10000)).ok());
  Assignment out = assign(f, {{"x", Rational(2)}, {"y", Rational(4)}});
  ViolationReport r = check_relaxed(f, out, Rational(1, 100));
  CHECK_FALSE(r.ok());
  CHECK(r.range_violations.size() == 2);
  CHECK(check_with(f, a, Guarantee::relaxed(Rational(1, 100))).ok());
}

TEST_CASE("approximation lemma size accounting") {
  Formula none = parse_formula("signature SQUARE1 delta 1\nvar x\nnonneg x\n");
  CHECK(lemma_approx_M(none).M == 0);
  Formula sq = parse_formula("signature SQUARE1 delta 1\nvar x; var y\nsquare x y\n");
  ApproxLemmaResult r = lemma_approx_M(sq);
  CHECK(r.squares == 1);
  CHECK(r.M >= 5);
  CHECK(r.complexity >= 5 * (2 + 1 + 1));
}

TEST_CASE("grid search finds planted witnesses") {
  std::mt19937_64 rng(4);
  int found = 0;
  for (int i = 0; i < 40; ++i) {
    auto s = oracle::random_ami(rng, 1 + i % 3, 1 + i % 4, true);
    SearchResult r = grid_search(s.formula);
    if (r.kind == SearchKind::FoundWitness) {
      ++found;
      CHECK(check_exact(s.formula, *r.witness).ok());
    }
  }
  // Every planted value lies on the default grid.
  CHECK(found == 40);
}

TEST_CASE("grid search budget") {
  FormulaBuilder fb;
  for (int i = 0; i < 9; ++i) fb.add_var("v" + std::to_string(i));
  CHECK_THROWS_AS(grid_search(fb.build()), Error);
}

TEST_CASE("branch and prune certifies infeasibility") {
  Formula f = parse_formula("var x; var y\neqc x 1/2\nadd x x y\n");
  SearchResult r = branch_and_prune(f);
  CHECK(r.kind == SearchKind::CertifiedEmpty);
  Formula g = parse_formula("var x; var y\nmul x x y\nadd y y y\neqc x 1/2\n");
  CHECK(branch_and_prune(g).kind == SearchKind::CertifiedEmpty);
  Formula h = parse_formula("var x; var y\nmul x x y\n");
  CHECK(branch_and_prune(h).kind == SearchKind::FoundWitness);
}

TEST_CASE("propagation fills forced values") {
  Formula f = parse_formula("var x; var y; var z\neqc x 1/2\nadd x x y\nmul y x z\n");
  Assignment a(3);
  propagate(f, a);
  CHECK(a.complete());
  CHECK(a.at(Var{2}) == Rational(1, 2));
}

TEST_CASE("equisat harness on ami2sq") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    auto s = oracle::random_ami(rng, 1 + i % 3, 1 + i % 4, i % 3 != 0);
    ReductionOutput r = ami_to_square1(s.formula);
    HarnessReport h = equisat_harness(s.formula, r);
    CHECK_MESSAGE(h.ok(), h.to_text());
  }
}

TEST_CASE("equisat harness on sq2ce uses the forward-produced witness") {
  Formula src = parse_formula("signature SQUARE1 delta 1\nvar one; var a; var b\neqc one 1\nadd a a one\nsquare a b\n");
  ReductionOutput r = square1_to_ce_expl(src, Poly1::parse("x^2"), Rational(1, 8), ChainMode::test(2));
  HarnessReport h = equisat_harness(src, r);
  CHECK_MESSAGE(h.ok(), h.to_text());
  CHECK(h.forward.checked);
  CHECK(h.backward.checked);
}
