#pragma once

#include "ccsp/interval.hpp"
#include "ccsp/rational.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ccsp {

/// Univariate polynomial with exact rational coefficients, stored densely by degree.
class Poly1 {
 public:
  Poly1() = default;
  explicit Poly1(std::vector<Rational> coeffs);

  static Poly1 constant(const Rational& c);
  static Poly1 monomial(const Rational& c, unsigned degree);
  /// Parses an expression in the single variable x, e.g. "x^2 + 1/20*x^3".
  static Poly1 parse(std::string_view text);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  Rational coeff(unsigned k) const { return k < c_.size() ? c_[k] : Rational(0); }
  const std::vector<Rational>& coeffs() const { return c_; }

  template <class T>
  T eval(const T& x) const {
    T acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = T(acc * x + coerce<T>(*it));
    return acc;
  }
  RInterval eval_interval(const RInterval& x) const;

  Poly1 derivative() const;
  /// this(inner(x))
  Poly1 compose(const Poly1& inner) const;
  /// Drops the factor x^k; requires the low k coefficients to vanish.
  Poly1 divide_by_x_power(unsigned k) const;

  friend Poly1 operator+(const Poly1& a, const Poly1& b);
  friend Poly1 operator-(const Poly1& a, const Poly1& b);
  friend Poly1 operator*(const Poly1& a, const Poly1& b);
  friend Poly1 operator*(const Rational& s, const Poly1& p);
  friend Poly1 operator-(const Poly1& p) { return Rational(-1) * p; }
  friend bool operator==(const Poly1& a, const Poly1& b) { return a.c_ == b.c_; }

  std::string to_string() const;

 private:
  void trim();
  std::vector<Rational> c_;
};

/// Bivariate polynomial in x, y; sparse map from (i, j) to the coefficient of x^i y^j.
class Poly2 {
 public:
  using Key = std::pair<unsigned, unsigned>;

  Poly2() = default;
  static Poly2 constant(const Rational& c);
  static Poly2 monomial(const Rational& c, unsigned i, unsigned j);
  static Poly2 from_x(const Poly1& p);
  /// Parses an expression in x and y, e.g. "(x-1)*(y-1) - 1".
  static Poly2 parse(std::string_view text);

  Rational coeff(unsigned i, unsigned j) const;
  const std::map<Key, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  unsigned total_degree() const;
  unsigned degree_x() const;
  unsigned degree_y() const;

  template <class T>
  T eval(const T& x, const T& y) const {
    std::vector<T> px{T(1)}, py{T(1)};
    for (unsigned k = 1; k <= degree_x(); ++k) px.push_back(T(px.back() * x));
    for (unsigned k = 1; k <= degree_y(); ++k) py.push_back(T(py.back() * y));
    T acc(0);
    for (const auto& [key, c] : terms_) acc = T(acc + coerce<T>(c) * px[key.first] * py[key.second]);
    return acc;
  }
  RInterval eval_interval(const RInterval& x, const RInterval& y) const;

  Poly2 partial_x() const;
  Poly2 partial_y() const;
  /// F(x, u(x)) as a polynomial in x.
  Poly1 substitute_y(const Poly1& u) const;
  /// F(y, x)
  Poly2 swapped() const;
  /// F(-x, -y)
  Poly2 reflected() const;
  /// If F = a01*y + q(x) with a01 != 0, the explicit graph y = -q(x)/a01.
  std::optional<Poly1> graph_form() const;

  friend Poly2 operator+(const Poly2& a, const Poly2& b);
  friend Poly2 operator-(const Poly2& a, const Poly2& b);
  friend Poly2 operator*(const Poly2& a, const Poly2& b);
  friend Poly2 operator*(const Rational& s, const Poly2& p);
  friend bool operator==(const Poly2& a, const Poly2& b) { return a.terms_ == b.terms_; }

  std::string to_string() const;

 private:
  void add_term(const Key& k, const Rational& c);
  std::map<Key, Rational> terms_;
};

}  // namespace ccsp
