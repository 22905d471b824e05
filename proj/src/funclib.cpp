#include "ccsp/funclib.hpp"

#include "ccsp/error.hpp"

#include <cmath>
#include <random>

namespace ccsp {

OriginJet origin_jet(const Poly2& f) {
  return {f.coeff(1, 0), f.coeff(0, 1), f.coeff(2, 0), f.coeff(1, 1), f.coeff(0, 2)};
}

std::vector<std::string> WellBehavedReport::failures() const {
  std::vector<std::string> out;
  if (!origin_zero) out.push_back("origin_zero");
  if (!gradient_nonzero) out.push_back("gradient_nonzero");
  if (!rational_partials) out.push_back("rational_partials");
  if (!computable) out.push_back("computable");
  return out;
}

WellBehavedReport check_well_behaved(const Poly2& f) {
  WellBehavedReport r;
  r.origin_zero = f.coeff(0, 0) == 0;
  r.gradient_nonzero = f.coeff(1, 0) != 0 || f.coeff(0, 1) != 0;
  return r;
}

const char* curvature_name(Curvature c) {
  switch (c) {
    case Curvature::ConvexlyCurved: return "ConvexlyCurved";
    case Curvature::ConcavelyCurved: return "ConcavelyCurved";
    case Curvature::Flat: return "Flat";
  }
  return "?";
}

namespace {

void require_well_behaved(const Poly2& f) {
  auto wb = check_well_behaved(f);
  if (!wb.ok()) {
    std::string why;
    for (const auto& s : wb.failures()) why += (why.empty() ? "" : ", ") + s;
    throw Error(Errc::NotWellBehaved, f.to_string() + " fails " + why);
  }
}

Rational kappa_partial(const OriginJet& j) {
  return j.fy() * j.fy() * j.fxx() - 2 * j.fx() * j.fy() * j.fxy() + j.fx() * j.fx() * j.fyy();
}

}  // namespace

CurvatureReport classify_curvature(const Poly2& f) {
  require_well_behaved(f);
  CurvatureReport r;
  r.jet = origin_jet(f);
  const auto& j = r.jet;
  r.kappa_prime = j.a01 * j.a01 * j.a20 - j.a10 * j.a01 * j.a11 + j.a10 * j.a10 * j.a02;
  r.kappa_prime_partial = kappa_partial(j);
  if (r.kappa_prime_partial != 2 * r.kappa_prime) throw std::logic_error("curvature forms disagree");
  int s = sign(r.kappa_prime);
  r.classification = s < 0 ? Curvature::ConvexlyCurved : s > 0 ? Curvature::ConcavelyCurved : Curvature::Flat;
  return r;
}

ExplJet expl_jet(const Poly2& f) {
  require_well_behaved(f);
  OriginJet j = origin_jet(f);
  if (j.fy() == 0) throw Error(Errc::DegenerateDirection, "F_y(0,0) = 0 for " + f.to_string());
  ExplJet e;
  e.d1 = -j.fx() / j.fy();
  e.d2 = -kappa_partial(j) / (j.fy() * j.fy() * j.fy());
  return e;
}

Rational near_squaring_bound(const Poly1& f, const Rational& r) {
  if (f.coeff(0) != 0 || f.coeff(1) != 0 || f.coeff(2) != 1)
    throw Error(Errc::ShapeError, "expected x^2 + O(x^3), got " + f.to_string());
  if (r < 0) throw Error(Errc::InvalidArgument, "negative radius");
  Rational c = 0;
  for (int k = 3; k <= f.degree(); ++k) c += abs(f.coeff(k)) * pow(r, static_cast<unsigned>(k - 3));
  return c;
}

bool certify_strict_sign(const Poly1& p, const RInterval& x, bool positive, int max_depth) {
  RInterval e = p.eval_interval(x);
  if (positive ? e.lo > 0 : e.hi < 0) return true;
  if (max_depth <= 0) return false;
  Rational m = x.mid();
  Rational pm = p.eval(m);
  if (positive ? pm <= 0 : pm >= 0) return false;
  return certify_strict_sign(p, RInterval(x.lo, m), positive, max_depth - 1) &&
         certify_strict_sign(p, RInterval(m, x.hi), positive, max_depth - 1);
}

namespace {

bool fy_sign_on(const Poly2& fy, int s, const RInterval& x, const RInterval& y, int depth) {
  RInterval e = fy.eval_interval(x, y);
  if (s > 0 ? e.lo > 0 : e.hi < 0) return true;
  if (depth <= 0) return false;
  if (x.width() >= y.width()) {
    Rational m = x.mid();
    return fy_sign_on(fy, s, RInterval(x.lo, m), y, depth - 1) && fy_sign_on(fy, s, RInterval(m, x.hi), y, depth - 1);
  }
  Rational m = y.mid();
  return fy_sign_on(fy, s, x, RInterval(y.lo, m), depth - 1) && fy_sign_on(fy, s, x, RInterval(m, y.hi), depth - 1);
}

}  // namespace

bool certify_fy_sign(const Poly2& f, const RInterval& x, const RInterval& y, int max_depth) {
  Poly2 fy = f.partial_y();
  int s = sign(fy.eval(x.mid(), y.mid()));
  if (s == 0) return false;
  return fy_sign_on(fy, s, x, y, max_depth);
}

// ------------------------------------------------------------------ UnivariateFn

UnivariateFn::UnivariateFn(BranchFn b) : rep_(std::move(b)) {
  const auto& br = std::get<BranchFn>(rep_);
  if (br.curve.coeff(0, 0) != 0 || br.curve.coeff(0, 1) == 0)
    throw Error(Errc::NotWellBehaved, "implicit branch needs F(0,0) = 0 and F_y(0,0) != 0");
  if (br.quad == 0 || br.scale <= 0) throw Error(Errc::InvalidArgument, "branch normalization must be nonsingular");
}

Rational UnivariateFn::eval_exact(const Rational& x) const {
  if (const Poly1* p = polynomial()) return p->eval(x);
  throw Error(Errc::NotEvaluable, "implicit branch of " + branch()->curve.to_string() + " has no exact value");
}

namespace {

double branch_root(const Poly2& f, double u) {
  Poly2 fy = f.partial_y();
  ExplJet j = expl_jet(f);
  double v = j.d1.get_d() * u + 0.5 * j.d2.get_d() * u * u;
  for (int it = 0; it < 60; ++it) {
    double fv = f.eval(u, v);
    double dv = fy.eval(u, v);
    if (dv == 0) break;
    double step = fv / dv;
    v -= step;
    if (std::abs(step) <= 1e-17 * (1 + std::abs(v))) break;
  }
  return v;
}

}  // namespace

double UnivariateFn::eval_double(double x) const {
  if (const Poly1* p = polynomial()) return p->eval(x);
  const BranchFn& b = *branch();
  double n = b.scale.get_d();
  double u = x / n;
  double h = branch_root(b.curve, u);
  return n * n * (h - b.lin.get_d() * u) / b.quad.get_d();
}

Rational UnivariateFn::residual(const Rational& x, const Rational& y) const {
  if (const Poly1* p = polynomial()) return y - p->eval(x);
  const BranchFn& b = *branch();
  Rational u = x / b.scale;
  Rational v = b.quad * y / (b.scale * b.scale) + b.lin * u;
  int s = sign(b.curve.coeff(0, 1)) * sign(b.quad);
  return s * b.curve.eval(u, v);
}

RInterval UnivariateFn::residual_interval(const RInterval& x, const RInterval& y) const {
  if (const Poly1* p = polynomial()) return y - p->eval_interval(x);
  const BranchFn& b = *branch();
  RInterval u = x * RInterval(Rational(1 / b.scale));
  RInterval v = RInterval(Rational(b.quad / (b.scale * b.scale))) * y + RInterval(b.lin) * u;
  int s = sign(b.curve.coeff(0, 1)) * sign(b.quad);
  RInterval e = b.curve.eval_interval(u, v);
  return s > 0 ? e : -e;
}

std::pair<Rational, Rational> UnivariateFn::taylor() const {
  if (const Poly1* p = polynomial()) return {p->coeff(1), p->coeff(2)};
  const BranchFn& b = *branch();
  ExplJet j = expl_jet(b.curve);
  return {b.scale * (j.d1 - b.lin) / b.quad, j.d2 / (2 * b.quad)};
}

Rational UnivariateFn::value_at_zero() const {
  if (const Poly1* p = polynomial()) return p->coeff(0);
  return 0;
}

UnivariateFn UnivariateFn::normalized(const Rational& a, const Rational& b) const {
  if (b == 0) throw Error(Errc::InvalidArgument, "normalization by zero");
  if (const Poly1* p = polynomial()) return Poly1(Rational(1 / b) * (*p - Poly1::monomial(a, 1)));
  BranchFn br = *branch();
  br.lin = br.lin + br.quad * a / br.scale;
  br.quad = br.quad * b;
  return br;
}

UnivariateFn UnivariateFn::rescaled(const Rational& n) const {
  if (n <= 0) throw Error(Errc::InvalidArgument, "rescale factor must be positive");
  if (const Poly1* p = polynomial()) {
    std::vector<Rational> c = p->coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k <= 2)
        c[k] *= pow(n, static_cast<unsigned>(2 - k));
      else
        c[k] /= pow(n, static_cast<unsigned>(k - 2));
    }
    return Poly1(std::move(c));
  }
  BranchFn br = *branch();
  br.scale *= n;
  return br;
}

std::string UnivariateFn::describe() const {
  if (const Poly1* p = polynomial()) return p->to_string();
  const BranchFn& b = *branch();
  return "branch(" + b.curve.to_string() + "; lin=" + to_string(b.lin) + ", quad=" + to_string(b.quad) +
         ", scale=" + to_string(b.scale) + ")";
}

bool certify_branch_bound(const BranchFn& b, const Rational& c, const Rational& r) {
  const Rational R = r / b.scale;
  const Rational A = abs(b.quad) * c * b.scale;
  const int s = sign(b.curve.coeff(0, 1));
  const RInterval U(Rational(-R), R);
  Poly1 base({Rational(0), b.lin, b.quad});
  Poly1 upper = base + Poly1::monomial(A, 3);
  Poly1 lower = base - Poly1::monomial(A, 3);
  RInterval yu = upper.eval_interval(U), yl = lower.eval_interval(U);
  RInterval ybox(yu.lo < yl.lo ? yu.lo : yl.lo, yu.hi < yl.hi ? yl.hi : yu.hi);
  if (!certify_fy_sign(b.curve, U, ybox, 18)) return false;
  Poly1 qp, qm;
  try {
    qp = b.curve.substitute_y(upper).divide_by_x_power(3);
    qm = b.curve.substitute_y(lower).divide_by_x_power(3);
  } catch (const Error&) {
    return false;
  }
  return certify_strict_sign(qp, U, s > 0) && certify_strict_sign(qm, U, s < 0);
}

Rational near_squaring_bound(const UnivariateFn& f, const Rational& r) {
  if (const Poly1* p = f.polynomial()) return near_squaring_bound(*p, r);
  auto [a1, a2] = f.taylor();
  if (f.value_at_zero() != 0 || a1 != 0 || a2 != 1)
    throw Error(Errc::ShapeError, "expected x^2 + O(x^3), got " + f.describe());
  double rd = r.get_d();
  double est = 0;
  for (int k = 1; k <= 200; ++k) {
    for (double x : {rd * k / 200.0, -rd * k / 200.0}) {
      double v = std::abs(f.eval_double(x) - x * x) / std::abs(x * x * x);
      if (std::isfinite(v) && v > est) est = v;
    }
  }
  Rational c(std::ceil(est * 1.25 * 1024 + 1), 1024);
  for (int attempt = 0; attempt < 8; ++attempt, c *= 2)
    if (certify_branch_bound(*f.branch(), c, r)) return c;
  throw Error(Errc::NotCertified, "could not certify a near-squaring bound for " + f.describe());
}

// ------------------------------------------------------------------ appendix identity

QuadExt operator+(const QuadExt& x, const QuadExt& y) { return {x.a + y.a, x.b + y.b, x.b != 0 ? x.r : y.r}; }
QuadExt operator-(const QuadExt& x, const QuadExt& y) { return {x.a - y.a, x.b - y.b, x.b != 0 ? x.r : y.r}; }
QuadExt operator*(const QuadExt& x, const QuadExt& y) {
  Rational r = x.b != 0 ? x.r : y.r;
  return {x.a * y.a + x.b * y.b * r, x.a * y.b + x.b * y.a, r};
}

int QuadExt::sign() const {
  int sa = ccsp::sign(a), sb = ccsp::sign(b);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // a and b*sqrt(r) have opposite signs; compare magnitudes by squares.
  Rational lhs = a * a, rhs = b * b * r;
  if (lhs == rhs) return 0;
  return lhs > rhs ? sa : sb;
}

RInterval QuadExt::enclosure(const Rational& width) const {
  if (b == 0) return RInterval(a);
  auto [lo, hi] = sqrt_enclosure(r, width / (abs(b) + 1));
  RInterval root(lo, hi);
  return RInterval(a) + RInterval(b) * root;
}

namespace {

RInterval enclose(const Rational& q, const Rational&) { return RInterval(q); }
RInterval enclose(const QuadExt& q, const Rational& w) { return q.enclosure(w); }
int sign_of(const Rational& q) { return sign(q); }
int sign_of(const QuadExt& q) { return q.sign(); }

template <class T>
AppendixVerdict appendix_point_impl(const T& x, const T& y) {
  const Rational width(1, Integer("1000000000000"));
  AppendixVerdict v;
  T s = x + y, d = x - y;
  T one(Rational(1));
  v.predicate = sign_of(T(Rational(8)) * x * y - one) == 0 && sign_of(one - s) >= 0 && sign_of(one + s) >= 0;
  // The first equation is z^2 = 1 - s^2.
  T disc = one - s * s;
  if (sign_of(disc) < 0) return v;
  // At a root, (z+d)^2 + (z-d)^2 = 2 z^2 + 2 d^2 = 2 disc + 2 d^2.
  T two(Rational(2));
  v.z_exists = sign_of(two * disc + two * d * d - one) == 0;
  if (!v.z_exists) return v;
  RInterval dz = enclose(disc, width);
  if (dz.is_point()) {
    if (auto root = exact_sqrt(dz.lo)) {
      v.z = RInterval(*root);
      return v;
    }
  }
  Rational lo = dz.lo < 0 ? Rational(0) : sqrt_enclosure(dz.lo, width).first;
  Rational hi = sqrt_enclosure(dz.hi, width).second;
  v.z = RInterval(lo, hi);
  return v;
}

}  // namespace

AppendixVerdict appendix_point(const Rational& x, const Rational& y) {
  AppendixVerdict v = appendix_point_impl(x, y);
  // For rational inputs, re-evaluate both original equations on the root enclosure.
  if (v.z_exists) {
    RInterval z = *v.z, s(Rational(x + y)), d(Rational(x - y));
    RInterval e1 = s * s + ipow(z, 2) - RInterval(Rational(1));
    RInterval e2 = ipow(z + d, 2) + ipow(z - d, 2) - RInterval(Rational(1));
    if (!e1.contains_zero() || !e2.contains_zero()) v.z_exists = false;
  }
  return v;
}

AppendixVerdict appendix_point(const QuadExt& x, const QuadExt& y) { return appendix_point_impl(x, y); }

AppendixReport verify_appendix_identity(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  auto random_rational = [&](long span, long max_den) {
    long den = uniform(1, max_den);
    return ratio(uniform(-span * den, span * den), den);
  };
  AppendixReport rep;
  for (std::size_t i = 0; i < samples; ++i) {
    Rational x, y;
    switch (i % 4) {
      case 0: {
        do x = random_rational(3, 40); while (x == 0);
        y = 1 / (8 * x);
        break;
      }
      case 1: {
        long den = uniform(8, 200);
        x = ratio(uniform(den * 15 / 100 + 1, den * 85 / 100), den);
        if (uniform(0, 1)) x = -x;
        y = 1 / (8 * x);
        break;
      }
      case 2:
        x = random_rational(2, 64);
        y = random_rational(2, 64);
        break;
      default: {
        do x = random_rational(1, 40); while (x == 0);
        y = 1 / (8 * x) + ratio(uniform(-1000, 1000), 1000000);
        break;
      }
    }
    x.canonicalize();
    y.canonicalize();
    AppendixVerdict v = appendix_point(x, y);
    ++rep.samples;
    if (v.predicate) ++rep.predicate_true;
    if (v.z && !v.z->is_point()) ++rep.irrational_roots;
    if (!v.agrees()) rep.counterexamples.emplace_back(x, y);
  }
  return rep;
}

}  // namespace ccsp
