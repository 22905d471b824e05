#include <doctest.h>

#include "ccsp/error.hpp"
#include "ccsp/formula_io.hpp"
#include "ccsp/reductions.hpp"
#include "ccsp/verifier.hpp"
#include "support/oracles.hpp"

using namespace ccsp;

namespace {

Assignment assign(const Formula& f, std::initializer_list<std::pair<const char*, Rational>> vals) {
  Assignment a(f.num_vars());
  for (const auto& [n, v] : vals) a.set(*f.find(n), v);
  return a;
}

const char* kSquareText = R"(signature SQUARE1 delta 1
var one; var a; var b
eqc one 1
add a a one
square a b
nonneg b
)";

}  // namespace

TEST_CASE("sound chain length") {
  CHECK(sound_chain_length(0) == 3);
  CHECK(sound_chain_length(1) == 4);
  CHECK(sound_chain_length(2) == 4);
  CHECK(sound_chain_length(3) == 4);
  CHECK(sound_chain_length(10) == 11);
  for (std::uint64_t M = 0; M < 5; ++M) {
    std::uint64_t L = sound_chain_length(M);
    std::uint64_t tl = std::uint64_t{1} << L, tm = std::uint64_t{1} << M;
    CHECK(tl >= tm + 7);
    CHECK(tl >= 7);
    if (L > 1) CHECK_FALSE(((std::uint64_t{1} << (L - 1)) >= tm + 7 && (std::uint64_t{1} << (L - 1)) >= 7));
  }
}

TEST_CASE("scalar multiple agrees with a linear-algebra oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> num(-40, 40), den(1, 24);
    Rational q = ratio(num(rng), den(rng));
    FormulaBuilder fb;
    fb.set_tag({SignatureKind::Square1, {}, {}, {}}).set_delta(1);
    fb.add_var("y");
    Formula base = fb.build();
    PassBuilder b(base);
    Var y = b.copy(Var{0});
    Var x = b.var("x", [y, q](const Assignment&, const Assignment& t) { return Rational(q * t.at(y)); });
    scalar_multiple(b, x, y, q);
    ReductionOutput out = b.finish("scalar", [](const Assignment& a) { return std::make_pair(a, Guarantee::exact()); });
    auto forced = oracle::forced_ratio(out.target, x, y);
    REQUIRE(forced.has_value());
    CHECK(*forced == q);
    // Logarithmic size in the numerator and denominator.
    std::size_t bits = mpz_sizeinbase(q.get_num().get_mpz_t(), 2) + mpz_sizeinbase(q.get_den().get_mpz_t(), 2);
    CHECK(out.target.constraints().size() <= 2 * bits + 4);
    Assignment src(1);
    src.set(Var{0}, Rational(3, 7));
    Assignment t = out.witness.forward(src);
    CHECK(check_exact(out.target, t).ok());
    CHECK(t.at(x) == q * Rational(3, 7));
  }
}

TEST_CASE("ami2sq mul gadget") {
  Formula f = parse_formula("var x; var y; var z\nmul x y z\n");
  ReductionOutput r = ami_to_square1(f);
  CHECK(r.target.tag().kind == SignatureKind::Square1);
  CHECK(validate_signature(r.target).ok());
  // n + 1 + 7 variables, 1 + 8 constraints.
  CHECK(r.target.num_vars() == 3 + 1 + 7);
  CHECK(r.target.constraints().size() == 1 + 8);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Rational x = oracle::random_rational(rng, 7, 3), y = oracle::random_rational(rng, 5, 3);
    Assignment src = assign(f, {{"x", x}, {"y", y}, {"z", x * y}});
    Assignment q = r.witness.forward(src);
    CHECK(check_exact(r.target, q).ok());
    auto [p, g] = r.witness.backward(q);
    CHECK(g.kind == GuaranteeKind::Exact);
    CHECK(p == src);
    // A wrong product makes the target unsatisfiable through the gadget equations.
    Assignment bad = src;
    bad.set(*f.find("z"), x * y + 1);
    CHECK_FALSE(check_exact(r.target, r.witness.forward(bad)).ok());
  }
}

TEST_CASE("ami2sq rejects constants other than one half") {
  Formula f = parse_formula("var x\neqc x 1/2\n");
  CHECK_NOTHROW(ami_to_square1(f));
  FormulaBuilder fb(f);
  fb.add(cons::Nonneg{Var{0}});
  CHECK_NOTHROW(ami_to_square1(fb.build()));
  Formula sq = parse_formula(kSquareText);
  CHECK_THROWS_AS(ami_to_square1(sq), Error);
}

TEST_CASE("sq2ce forward and backward maps") {
  Formula src = parse_formula(kSquareText);
  const UnivariateFn f = Poly1::parse("x^2 + x^3/20");
  for (unsigned L : {2u, 3u}) {
    ReductionOutput r = square1_to_ce_expl(src, f, Rational(1, 8), ChainMode::test(L));
    CHECK(r.target.tag().kind == SignatureKind::CeExpl);
    CHECK(validate_signature(r.target).ok());
    Assignment p = assign(src, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
    REQUIRE(check_exact(src, p).ok());
    Assignment q = r.witness.forward(p);
    CHECK(check_exact(r.target, q).ok());
    auto [back, g] = r.witness.backward(q);
    CHECK(g.kind == GuaranteeKind::RelaxedApproxSquare);
    CHECK(back == p);
    CHECK(check_with(src, back, g).ok());
    CHECK(*g.eps == 100 * q.at(r.landmarks.at("eps")));
    CHECK(r.provenance.lookup("L") == std::to_string(L));
  }
}

TEST_CASE("sq2ce rejects a non-square source value") {
  Formula src = parse_formula(kSquareText);
  ReductionOutput r = square1_to_ce_expl(src, Poly1::parse("x^2"), Rational(1, 8), ChainMode::test(2));
  Assignment p = assign(src, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 2)}});
  CHECK_FALSE(check_exact(r.target, r.witness.forward(p)).ok());
}

TEST_CASE("sq2ce preconditions") {
  Formula src = parse_formula(kSquareText);
  CHECK_THROWS_WITH_AS(square1_to_ce_expl(src, Poly1::parse("x^2"), Rational(1, 4), ChainMode::test(2)),
                       doctest::Contains("delta"), Error);
  CHECK_THROWS_AS(square1_to_ce_expl(src, Poly1::parse("x^2 + 4*x^3"), Rational(1, 8), ChainMode::test(2)), Error);
  // A one-step chain leaves eps = 1/64 > delta / 100.
  CHECK_THROWS_AS(square1_to_ce_expl(src, Poly1::parse("x^2"), Rational(1, 8), ChainMode::test(1)), Error);
  Formula ami = parse_formula("var x\neqc x 1/2\n");
  CHECK_THROWS_AS(square1_to_ce_expl(ami, Poly1::parse("x^2"), Rational(1, 8), ChainMode::test(2)), Error);
}

TEST_CASE("sq2ce sound mode records the lemma chain") {
  Formula src = parse_formula(kSquareText);
  ReductionOutput r = square1_to_ce_expl(src, Poly1::parse("x^2"), Rational(1, 8), ChainMode::sound());
  auto M = std::stoull(*r.provenance.lookup("M"));
  CHECK(*r.provenance.lookup("L") == std::to_string(sound_chain_length(M)));
  CHECK_FALSE(r.witness.forward_available());
}

TEST_CASE("sq2cci forward and backward maps") {
  Formula src = parse_formula(kSquareText);
  const UnivariateFn f = Poly1::parse("x^2"), g = Poly1::parse("x^2 + x^3/20");
  ReductionOutput r = square1_to_cci_expl(src, f, g, Rational(1, 8), ChainMode::test(2));
  CHECK(validate_signature(r.target).ok());
  Assignment p = assign(src, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
  Assignment q = r.witness.forward(p);
  CHECK(check_exact(r.target, q).ok());
  auto [back, gu] = r.witness.backward(q);
  CHECK(back == p);
  CHECK(check_with(src, back, gu).ok());
}

TEST_CASE("cubic rescale") {
  const UnivariateFn f = Poly1::parse("x^2 + 3*x^3"), g = Poly1::parse("x^2 - 2*x^3");
  CubicRescale cr = rescale_cubic(f, g, Rational(1, 8));
  CHECK(cr.c == 3);
  CHECK(cr.N == 31);
  CHECK(*cr.f_star.polynomial() == Poly1::parse("x^2 + 3/31*x^3"));
  CHECK(near_squaring_bound(cr.f_star, Rational(1, 8)) <= Rational(1, 10));
  CHECK(near_squaring_bound(cr.g_star, Rational(1, 8)) <= Rational(1, 10));

  Formula sq = parse_formula(kSquareText);
  ReductionOutput s = square1_to_cci_expl(sq, cr.f_star, cr.g_star, Rational(1, 8), ChainMode::test(2));
  ReductionOutput r = cubic_rescale_pass(s.target, f, g, cr.N);
  CHECK(r.target.delta() == s.target.delta());
  Assignment p = assign(sq, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
  Assignment q = r.witness.forward(s.witness.forward(p));
  CHECK(check_exact(r.target, q).ok());
  CHECK_THROWS_AS(cubic_rescale_pass(s.target, f, g, cr.N + 1), Error);
}

TEST_CASE("linear normalization") {
  const UnivariateFn f = Poly1::parse("2*x + 3*x^2 + x^3/10"), g = Poly1::parse("-x + x^2/2");
  LinearNormalization ln = normalize_linear(f, g);
  CHECK(ln.params.a == 2);
  CHECK(ln.params.b == 3);
  CHECK(ln.params.c == -1);
  CHECK(ln.params.d == Rational(1, 2));
  CHECK(ln.K == Rational(15, 2));
  CHECK(*ln.f_star.polynomial() == Poly1::parse("x^2 + x^3/30"));
  CHECK(*ln.g_star.polynomial() == Poly1::parse("x^2"));
  CHECK_THROWS_AS(normalize_linear(Poly1::parse("x - x^2"), g), Error);

  Formula sq = parse_formula(kSquareText);
  CubicRescale cr = rescale_cubic(ln.f_star, ln.g_star, Rational(1, 8));
  REQUIRE(cr.N == 1);
  ReductionOutput s = square1_to_cci_expl(sq, ln.f_star, ln.g_star, Rational(1, 8), ChainMode::test(2));
  ReductionOutput r = linear_normalize_pass(s.target, f, g);
  CHECK(r.target.delta() == ln.K / 8);
  CHECK(validate_signature(r.target).ok());
  Assignment p = assign(sq, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
  CHECK(check_exact(r.target, r.witness.forward(s.witness.forward(p))).ok());
}

TEST_CASE("cci2ce") {
  Formula sq = parse_formula(kSquareText);
  const UnivariateFn f = Poly1::parse("x^2");
  ReductionOutput s = square1_to_cci_expl(sq, f, f, Rational(1, 8), ChainMode::test(2));
  ReductionOutput r = cci_expl_to_ce_expl(s.target);
  CHECK(r.target.tag().kind == SignatureKind::CeExpl);
  CHECK(validate_signature(r.target).ok());
  Assignment p = assign(sq, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
  CHECK(check_exact(r.target, r.witness.forward(s.witness.forward(p))).ok());
  ReductionOutput t = square1_to_cci_expl(sq, f, Poly1::parse("x^2 + x^3/20"), Rational(1, 8), ChainMode::test(2));
  CHECK_THROWS_AS(cci_expl_to_ce_expl(t.target), Error);
}

TEST_CASE("orientation and explicit functions") {
  Poly2 F = Poly2::parse("x*y - x - y");
  CHECK(oriented(F, {false, true}) == Poly2::parse("x*y + x + y"));
  CHECK(oriented(F, {true, false}) == F);
  CHECK(oriented(Poly2::parse("x - y^2"), {true, false}) == Poly2::parse("y - x^2"));
  UnivariateFn e = explicit_of(Poly2::parse("2*y - 2*x^2"));
  REQUIRE(e.is_polynomial());
  CHECK(*e.polynomial() == Poly1::parse("x^2"));
  CHECK_FALSE(explicit_of(F).is_polynomial());
}

TEST_CASE("explicit to implicit") {
  Formula sq = parse_formula(kSquareText);
  const Poly2 F = Poly2::parse("y - x^2");
  ReductionOutput s = square1_to_ce_expl(sq, *explicit_of(F).polynomial(), Rational(1, 8), ChainMode::test(2));
  ReductionOutput r = explicit_to_implicit(s.target, F);
  CHECK(r.target.tag().kind == SignatureKind::Ce);
  CHECK(validate_signature(r.target).ok());
  CHECK(r.provenance.warnings.empty());
  Assignment p = assign(sq, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
  CHECK(check_exact(r.target, r.witness.forward(s.witness.forward(p))).ok());
  CHECK_THROWS_AS(explicit_to_implicit(s.target, Poly2::parse("y - 2*x^2")), Error);
  CHECK_THROWS_AS(explicit_to_implicit(s.target, Poly2::parse("x - y")), Error);
}

TEST_CASE("signflip keeps satisfying assignments") {
  Formula sq = parse_formula(kSquareText);
  const Poly2 F = Poly2::parse("-y - x^2");
  const Orientation o{false, true};
  const Poly2 Fw = oriented(F, o);
  CHECK(Fw == Poly2::parse("y - x^2"));
  ReductionOutput s = square1_to_ce_expl(sq, *explicit_of(Fw).polynomial(), Rational(1, 8), ChainMode::test(2));
  ReductionOutput i = explicit_to_implicit(s.target, Fw);
  ReductionOutput r = signflip_wrap(i.target, F, o);
  CHECK(r.target.bivariate(*r.target.tag().f) == F);
  Assignment p = assign(sq, {{"one", 1}, {"a", Rational(1, 2)}, {"b", Rational(1, 4)}});
  CHECK(check_exact(r.target, r.witness.forward(i.witness.forward(s.witness.forward(p)))).ok());
  CHECK_THROWS_AS(signflip_wrap(i.target, F, Orientation{}), Error);
}

TEST_CASE("pipeline to CE with a polynomial graph") {
  Formula ami = parse_formula("var x; var y\neqc x 1/2\nmul x x y\n");
  PipelineTarget t{SignatureKind::Ce, Poly2::parse("y - x^2 - x^3/20"), std::nullopt};
  PipelineResult res = pipeline(ami, t, {});
  const Formula& out = res.final_formula();
  CHECK(out.tag().kind == SignatureKind::Ce);
  CHECK(validate_signature(out).ok());
  CHECK(out.bivariate(*out.tag().f) == t.F);
  Assignment src = assign(ami, {{"x", Rational(1, 2)}, {"y", Rational(1, 4)}});
  CHECK(check_exact(out, res.forward(src)).ok());
  // The direct route needs no normalization stage.
  CHECK(res.stages.size() == 3);
}

TEST_CASE("pipeline to CE through normalization") {
  Formula ami = parse_formula("var x; var y\neqc x 1/2\nmul x x y\n");
  PipelineTarget t{SignatureKind::Ce, Poly2::parse("y - 2*x - 3*x^2 - x^3"), std::nullopt};
  PipelineResult res = pipeline(ami, t, {});
  CHECK(res.final_formula().delta() == Rational(1, 8));
  CHECK(validate_signature(res.final_formula()).ok());
  Assignment src = assign(ami, {{"x", Rational(1, 2)}, {"y", Rational(1, 4)}});
  CHECK(check_exact(res.final_formula(), res.forward(src)).ok());
  CHECK(res.summary.lookup("a") == "2");
}

TEST_CASE("pipeline to CCI for the packing pair") {
  Formula ami = parse_formula("var x; var y\neqc x 1/2\nadd x x y\n");
  PipelineTarget t{SignatureKind::Cci, Poly2::parse("(x-1)*(y-1) - 1"), Poly2::parse("(x-1)^2 + (y/4-1)^2 - 2")};
  PipelineResult res = pipeline(ami, t, {});
  const Formula& out = res.final_formula();
  CHECK(out.tag().kind == SignatureKind::Cci);
  CHECK(out.delta() == Rational(1, 8));
  CHECK(out.bivariate(*out.tag().f) == t.F);
  CHECK(out.bivariate(*out.tag().g) == *t.G);
  CHECK(validate_signature(out).ok());
  for (const char* key : {"L", "M", "N", "a", "b", "c", "d", "delta'"}) CHECK(res.summary.lookup(key).has_value());
  CHECK(res.summary.warnings.empty());
  // The explicit branches are not polynomial, so the forward map is declared unavailable.
  CHECK_FALSE(res.stages[1].witness.forward_available());
}

TEST_CASE("pipeline rejects a flat target") {
  Formula ami = parse_formula("var x\neqc x 1/2\n");
  CHECK_THROWS_AS(pipeline(ami, {SignatureKind::Ce, Poly2::parse("x + y"), std::nullopt}, {}), Error);
  CHECK_THROWS_AS(
      pipeline(ami, {SignatureKind::Cci, Poly2::parse("y - x^2"), Poly2::parse("y - x^2 - x^3")}, {}), Error);
}

TEST_CASE("ce facts hold for the test chain") {
  for (unsigned L : {2u, 3u})
    for (const FactCheck& fc : ce_expl_facts(Poly1::parse("x^2 + x^3/20"), Rational(1, 8), L, 1000))
      CHECK_MESSAGE(fc.holds(), fc.name << ": " << fc.detail);
  // Grid size and the zero skip.
  auto grid = fact_grid(Rational(1, 8), 1000);
  CHECK(grid.size() == 1000);
  CHECK(grid.front() == Rational(-1, 8));
  CHECK(grid.back() == Rational(1, 8));
}

TEST_CASE("cci facts hold for the test chain") {
  for (const FactCheck& fc : cci_expl_facts(Poly1::parse("x^2"), Poly1::parse("x^2 + x^3/20"), Rational(1, 8), 2, 1000))
    CHECK_MESSAGE(fc.holds(), fc.name << ": " << fc.detail);
  auto facts = cci_expl_facts(Poly1::parse("x^2"), Poly1::parse("x^2 + x^3/20"), Rational(1, 8), 2, 10);
  CHECK(facts.size() == 7);
}
