#include "ccsp/rational.hpp"

#include "ccsp/error.hpp"

#include <cctype>
#include <cmath>

namespace ccsp {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::Syntax: return "SyntaxError";
    case Errc::UnknownKeyword: return "UnknownKeyword";
    case Errc::UndeclaredVariable: return "UndeclaredVariable";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::Arity: return "ArityError";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::NotWellBehaved: return "NotWellBehaved";
    case Errc::DegenerateDirection: return "DegenerateDirection";
    case Errc::ShapeError: return "ShapeError";
    case Errc::SignatureError: return "SignatureError";
    case Errc::NearSquaringTooLoose: return "NearSquaringTooLoose";
    case Errc::DeltaTooLarge: return "DeltaTooLarge";
    case Errc::CurvatureSignError: return "CurvatureSignError";
    case Errc::NotCertified: return "NotCertified";
    case Errc::NotEvaluable: return "NotEvaluable";
    case Errc::MissingVariable: return "MissingVariable";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::MotionCountMismatch: return "MotionCountMismatch";
    case Errc::InvalidPolygon: return "InvalidPolygon";
    case Errc::InvalidMotion: return "InvalidMotion";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "IoError";
  }
  return "Error";
}

namespace {

bool valid_integer(std::string_view s, bool allow_sign) {
  std::size_t i = 0;
  if (allow_sign && !s.empty() && (s[0] == '-' || s[0] == '+')) i = 1;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

std::optional<Rational> try_parse_rational(std::string_view text) {
  auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!valid_integer(num, true) || !valid_integer(den, false)) return std::nullopt;
  std::string n(num);
  if (n[0] == '+') n.erase(0, 1);
  Integer d(std::string(den), 10);
  if (d == 0) return std::nullopt;
  Rational q(Integer(n, 10), d);
  q.canonicalize();
  return q;
}

Rational parse_rational(std::string_view text) {
  auto q = try_parse_rational(text);
  if (!q) throw Error(Errc::Syntax, "malformed rational '" + std::string(text) + "'");
  return *q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational pow(const Rational& base, unsigned exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  return out;
}

Rational ratio(const Integer& n, const Integer& d) {
  if (d == 0) throw Error(Errc::InvalidArgument, "zero denominator");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

Integer floor_plus_one(const Rational& q) {
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return f + 1;
}

std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t()))
    return std::nullopt;
  Integer n = sqrt(q.get_num());
  Integer d = sqrt(q.get_den());
  return Rational(n, d);
}

std::pair<Rational, Rational> sqrt_enclosure(const Rational& q, const Rational& width) {
  if (q < 0) throw Error(Errc::InvalidArgument, "sqrt of negative rational");
  if (auto r = exact_sqrt(q)) return {*r, *r};
  Rational lo = 0;
  Rational hi = q > 1 ? q : Rational(1);
  // Seed from the double root to keep the bisection short.
  double approx = std::sqrt(q.get_d());
  Rational a(approx * (1 - 1e-12)), b(approx * (1 + 1e-12) + 1e-300);
  if (a * a <= q && b * b >= q) {
    lo = a;
    hi = b;
  }
  while (hi - lo > width) {
    Rational mid = (lo + hi) / 2;
    if (mid * mid <= q)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

}  // namespace ccsp
