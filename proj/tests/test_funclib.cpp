#include <doctest.h>

#include "ccsp/error.hpp"
#include "ccsp/funclib.hpp"
#include "ccsp/packgeom.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace ccsp;

TEST_CASE("origin jet and well-behavedness") {
  OriginJet j = origin_jet(Poly2::parse("3*x - 2*y + x^2 + 5*x*y - y^2 + x^3"));
  CHECK(j.fx() == 3);
  CHECK(j.fy() == -2);
  CHECK(j.fxx() == 2);
  CHECK(j.fxy() == 5);
  CHECK(j.fyy() == -2);
  CHECK(check_well_behaved(Poly2::parse("x*y - x - y")).ok());
  CHECK_FALSE(check_well_behaved(Poly2::parse("x*y - x - y + 1")).ok());
  CHECK_FALSE(check_well_behaved(Poly2::parse("x*y")).ok());
  CHECK_THROWS_AS(classify_curvature(Poly2::parse("x*y")), Error);
}

TEST_CASE("curvature of the packing pair") {
  CurvatureReport f = classify_curvature(packing_f());
  CHECK(f.kappa_prime == -1);
  CHECK(f.kappa_prime_partial == -2);
  CHECK(f.classification == Curvature::ConvexlyCurved);
  CurvatureReport g = classify_curvature(packing_g());
  CHECK(g.kappa_prime == Rational(1, 2));
  CHECK(g.classification == Curvature::ConcavelyCurved);
  CHECK(classify_curvature(Poly2::parse("x + y")).classification == Curvature::Flat);
  CHECK(classify_curvature(Poly2::parse("y - x^2")).classification == Curvature::ConvexlyCurved);
}

TEST_CASE("curvature is invariant under swap and reflection") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    Poly2 F = oracle::random_curve(rng);
    Rational k = classify_curvature(F).kappa_prime;
    CHECK(classify_curvature(F.swapped()).kappa_prime == k);
    CHECK(classify_curvature(F.reflected()).kappa_prime == k);
    CHECK(classify_curvature(Rational(-3) * F).kappa_prime == -27 * k);
  }
}

TEST_CASE("explicit jet") {
  ExplJet j = expl_jet(Poly2::parse("y - x^2"));
  CHECK(j.d1 == 0);
  CHECK(j.d2 == 2);
  ExplJet k = expl_jet(packing_f());
  CHECK(k.d1 == -1);
  CHECK(k.d2 == -2);
  CHECK_THROWS_AS(expl_jet(Poly2::parse("x - y^2")), Error);
}

TEST_CASE("explicit jet agrees with the traced curve") {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    Poly2 F = oracle::random_curve(rng);
    ExplJet j = expl_jet(F);
    if (abs(j.d2) < Rational(1, 4)) continue;
    auto fd = oracle::finite_jet(F, 1e-3L);
    REQUIRE(fd);
    const long double d1 = j.d1.get_d(), d2 = j.d2.get_d();
    CHECK(std::fabs(fd->d1 - d1) <= 1e-4L * std::fabs(d1));
    CHECK(std::fabs(fd->d2 - d2) <= 1e-4L * std::fabs(d2));
    Rational fy = origin_jet(F).fy();
    CHECK(sign(classify_curvature(F).kappa_prime) == -sign(j.d2 * fy * fy * fy));
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("near-squaring bound for polynomials") {
  CHECK(near_squaring_bound(Poly1::parse("x^2"), Rational(1, 8)) == 0);
  CHECK(near_squaring_bound(Poly1::parse("x^2 + x^3/20"), Rational(1, 8)) == Rational(1, 20));
  CHECK(near_squaring_bound(Poly1::parse("x^2 + x^3 - 8*x^4"), Rational(1, 8)) == 2);
  CHECK_THROWS_AS(near_squaring_bound(Poly1::parse("x^2 + x"), Rational(1, 8)), Error);
  CHECK_THROWS_AS(near_squaring_bound(Poly1::parse("2*x^2"), Rational(1, 8)), Error);
  // The bound holds on sampled points.
  Poly1 p = Poly1::parse("x^2 - x^3/3 + x^5");
  Rational c = near_squaring_bound(p, Rational(1, 2));
  for (int k = -20; k <= 20; ++k) {
    Rational x = ratio(k, 40);
    CHECK(abs(p.eval(x) - x * x) <= c * abs(x * x * x));
  }
}

TEST_CASE("implicit branch functions") {
  // Reflected packing f: xy + x + y = 0 gives y = -x / (1 + x).
  BranchFn b{packing_f().reflected(), 0, 1, 1};
  UnivariateFn f(b);
  CHECK_FALSE(f.is_polynomial());
  CHECK_THROWS_AS(f.eval_exact(Rational(1, 10)), Error);
  CHECK(std::fabs(f.eval_double(0.1) + 0.1 / 1.1) < 1e-12);
  auto [a1, a2] = f.taylor();
  CHECK(a1 == -1);
  CHECK(a2 == 1);
  CHECK(f.value_at_zero() == 0);
  // Residual sign matches y - f(x).
  CHECK(sign(f.residual(Rational(1, 10), Rational(0))) > 0);
  CHECK(sign(f.residual(Rational(1, 10), Rational(-1, 5))) < 0);
  // Normalized and rescaled forms: x^2 + O(x^3).
  UnivariateFn n = f.normalized(a1, a2);
  auto [n1, n2] = n.taylor();
  CHECK(n1 == 0);
  CHECK(n2 == 1);
  UnivariateFn r = n.rescaled(Rational(4));
  CHECK(std::fabs(r.eval_double(0.1) - 16 * n.eval_double(0.025)) < 1e-12);
  Rational c = near_squaring_bound(n, Rational(1, 8));
  CHECK(c > 0);
  // y = x/(1+x) - x... normalized is x^2/(1+x): the true ratio tends to 1.
  CHECK(c >= Rational(1));
  CHECK(certify_branch_bound(*n.branch(), c, Rational(1, 8)));
  CHECK_FALSE(certify_branch_bound(*n.branch(), Rational(1, 2), Rational(1, 8)));
}

TEST_CASE("appendix identity on directed points") {
  CHECK(appendix_point(Rational(1, 2), Rational(1, 4)).predicate);
  CHECK(appendix_point(Rational(1, 2), Rational(1, 4)).agrees());
  CHECK_FALSE(appendix_point(Rational(1), Rational(1, 8)).predicate);
  CHECK(appendix_point(Rational(1), Rational(1, 8)).agrees());
  CHECK(appendix_point(Rational(0), Rational(0)).agrees());
  // x + y = 1 and 8xy = 1: x, y = (2 +- sqrt 2) / 4.
  QuadExt x(Rational(1, 2), Rational(1, 4), Rational(2)), y(Rational(1, 2), Rational(-1, 4), Rational(2));
  CHECK((x + y) == QuadExt(Rational(1)));
  CHECK((QuadExt(Rational(8)) * x * y) == QuadExt(Rational(1)));
  AppendixVerdict v = appendix_point(x, y);
  CHECK(v.predicate);
  CHECK(v.z_exists);
  CHECK(v.agrees());
}

TEST_CASE("appendix identity sampling") {
  AppendixReport r = verify_appendix_identity(2000, 7);
  CHECK(r.ok());
  CHECK(r.samples == 2000);
  CHECK(r.predicate_true > 0);
  CHECK(verify_appendix_identity(300, 7).predicate_true == verify_appendix_identity(300, 7).predicate_true);
}
