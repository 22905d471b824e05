#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace ccsp {

using Rational = mpq_class;
using Integer = mpz_class;

/// Accepts "p", "-p", "p/q" (q != 0). The result is canonicalized.
std::optional<Rational> try_parse_rational(std::string_view text);
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

Rational pow(const Rational& base, unsigned exponent);

inline int sign(const Rational& q) { return sgn(q); }

/// Smallest integer strictly greater than q.
Integer floor_plus_one(const Rational& q);
/// n / d in canonical form. The two-argument mpq_class constructor does not reduce.
Rational ratio(const Integer& n, const Integer& d);

/// Rational square root if q is the square of a rational.
std::optional<Rational> exact_sqrt(const Rational& q);

/// Rational enclosure [lo, hi] of sqrt(q) with hi - lo <= width, q >= 0.
std::pair<Rational, Rational> sqrt_enclosure(const Rational& q, const Rational& width);

template <class T>
T coerce(const Rational& q);

template <>
inline Rational coerce<Rational>(const Rational& q) { return q; }
template <>
inline double coerce<double>(const Rational& q) { return q.get_d(); }
template <>
inline long double coerce<long double>(const Rational& q) {
  return static_cast<long double>(q.get_num().get_d()) / static_cast<long double>(q.get_den().get_d());
}

}  // namespace ccsp
