#pragma once

#include "ccsp/interval.hpp"
#include "ccsp/poly.hpp"
#include "ccsp/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ccsp {

/// First and second order Taylor data of F at the origin: F ~ a10 x + a01 y + a20 x^2 + a11 xy + a02 y^2.
struct OriginJet {
  Rational a10, a01, a20, a11, a02;

  Rational fx() const { return a10; }
  Rational fy() const { return a01; }
  Rational fxx() const { return 2 * a20; }
  Rational fxy() const { return a11; }
  Rational fyy() const { return 2 * a02; }
};

OriginJet origin_jet(const Poly2& f);

struct WellBehavedReport {
  bool origin_zero = false;
  bool gradient_nonzero = false;
  // Polynomials with rational coefficients always satisfy these two.
  bool rational_partials = true;
  bool computable = true;

  bool ok() const { return origin_zero && gradient_nonzero && rational_partials && computable; }
  std::vector<std::string> failures() const;
};

WellBehavedReport check_well_behaved(const Poly2& f);

enum class Curvature { ConvexlyCurved, ConcavelyCurved, Flat };

const char* curvature_name(Curvature c);

struct CurvatureReport {
  /// a01^2 a20 - a10 a01 a11 + a10^2 a02
  Rational kappa_prime;
  /// fy^2 fxx - 2 fx fy fxy + fx^2 fyy, always twice kappa_prime.
  Rational kappa_prime_partial;
  Curvature classification = Curvature::Flat;
  OriginJet jet;
};

CurvatureReport classify_curvature(const Poly2& f);

/// Derivatives at 0 of the implicit branch y(x) of F(x, y) = 0 through the origin.
struct ExplJet {
  Rational d1;
  Rational d2;
};

ExplJet expl_jet(const Poly2& f);

/// For f = x^2 + sum_{k>=3} a_k x^k, the bound sum |a_k| r^(k-3) on |f(x) - x^2| / |x|^3 over |x| <= r.
Rational near_squaring_bound(const Poly1& f, const Rational& r);

inline Rational eval_exact(const Poly1& f, const Rational& x) { return f.eval(x); }
inline Rational eval_exact(const Poly2& f, const Rational& x, const Rational& y) { return f.eval(x, y); }
inline RInterval eval_interval(const Poly1& f, const RInterval& x) { return f.eval_interval(x); }
inline RInterval eval_interval(const Poly2& f, const RInterval& x, const RInterval& y) {
  return f.eval_interval(x, y);
}

/// Certifies sign(F_y) * F_y > 0 on box by exact interval bisection; returns false when undecided.
bool certify_fy_sign(const Poly2& f, const RInterval& x, const RInterval& y, int max_depth = 16);

/// Certifies p(x) > 0 on the interval (if positive) or p(x) < 0 (if !positive).
bool certify_strict_sign(const Poly1& p, const RInterval& x, bool positive, int max_depth = 40);

/// Explicit function x -> scale^2 * (h(x/scale) - lin * x/scale) / quad where h is the branch of
/// curve = 0 through the origin; curve_y(0, 0) must be nonzero.
struct BranchFn {
  Poly2 curve;
  Rational lin = 0;
  Rational quad = 1;
  Rational scale = 1;

  friend bool operator==(const BranchFn&, const BranchFn&) = default;
};

/// Univariate function used by explicit constraints: a polynomial or an implicit branch.
class UnivariateFn {
 public:
  UnivariateFn() = default;
  UnivariateFn(Poly1 p) : rep_(std::move(p)) {}
  UnivariateFn(BranchFn b);

  bool is_polynomial() const { return std::holds_alternative<Poly1>(rep_); }
  const Poly1* polynomial() const { return std::get_if<Poly1>(&rep_); }
  const BranchFn* branch() const { return std::get_if<BranchFn>(&rep_); }

  /// Exact value; NotEvaluable for implicit branches.
  Rational eval_exact(const Rational& x) const;
  double eval_double(double x) const;

  /// Sign-equivalent to y - f(x). For polynomials this is the exact defect.
  Rational residual(const Rational& x, const Rational& y) const;
  RInterval residual_interval(const RInterval& x, const RInterval& y) const;

  /// f'(0) and f''(0)/2.
  std::pair<Rational, Rational> taylor() const;
  Rational value_at_zero() const;

  /// (f - a x) / b
  UnivariateFn normalized(const Rational& a, const Rational& b) const;
  /// N^2 f(x / N)
  UnivariateFn rescaled(const Rational& n) const;

  std::string describe() const;

  friend bool operator==(const UnivariateFn&, const UnivariateFn&) = default;

 private:
  std::variant<Poly1, BranchFn> rep_;
};

/// Certified bound c with |f(x) - x^2| <= c |x|^3 on |x| <= r. Requires f = x^2 + O(x^3).
/// For polynomials this is the closed form; for implicit branches it is certified by exact
/// sign checks and raises NotCertified when that fails.
Rational near_squaring_bound(const UnivariateFn& f, const Rational& r);

/// Exact check of a given bound c for an implicit branch (see near_squaring_bound).
bool certify_branch_bound(const BranchFn& b, const Rational& c, const Rational& r);

// ------------------------------------------------------------------ appendix identity

/// a + b sqrt(r) with rational a, b and a fixed non-square radicand r > 0.
struct QuadExt {
  Rational a = 0, b = 0, r = 2;

  QuadExt() = default;
  QuadExt(const Rational& a_) : a(a_) {}
  QuadExt(const Rational& a_, const Rational& b_, const Rational& r_) : a(a_), b(b_), r(r_) {}

  friend QuadExt operator+(const QuadExt& x, const QuadExt& y);
  friend QuadExt operator-(const QuadExt& x, const QuadExt& y);
  friend QuadExt operator*(const QuadExt& x, const QuadExt& y);
  friend bool operator==(const QuadExt& x, const QuadExt& y) { return x.a == y.a && x.b == y.b; }
  int sign() const;
  RInterval enclosure(const Rational& width) const;
};

struct AppendixVerdict {
  /// 8xy = 1 and |x + y| <= 1
  bool predicate = false;
  /// a real z solves (x+y)^2 + z^2 = 1 and (z+x-y)^2 + (z-x+y)^2 = 1
  bool z_exists = false;
  /// The root z (point interval when rational or zero), empty when no root.
  std::optional<RInterval> z;
  bool agrees() const { return predicate == z_exists; }
};

AppendixVerdict appendix_point(const Rational& x, const Rational& y);
AppendixVerdict appendix_point(const QuadExt& x, const QuadExt& y);

struct AppendixReport {
  std::size_t samples = 0;
  std::size_t predicate_true = 0;
  std::size_t irrational_roots = 0;
  std::vector<std::pair<Rational, Rational>> counterexamples;
  bool ok() const { return counterexamples.empty(); }
};

AppendixReport verify_appendix_identity(std::size_t samples, std::uint64_t seed);

}  // namespace ccsp
