#include "ccsp/poly.hpp"

#include "ccsp/error.hpp"

#include <algorithm>
#include <cctype>

namespace ccsp {

// ---------------------------------------------------------------- Poly1

Poly1::Poly1(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

void Poly1::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly1 Poly1::constant(const Rational& c) { return Poly1({c}); }

Poly1 Poly1::monomial(const Rational& c, unsigned degree) {
  std::vector<Rational> v(degree + 1);
  v[degree] = c;
  return Poly1(std::move(v));
}

RInterval Poly1::eval_interval(const RInterval& x) const {
  RInterval acc(Rational(0));
  for (unsigned k = 0; k < c_.size(); ++k) {
    if (c_[k] == 0) continue;
    acc += RInterval(c_[k]) * ipow(x, k);
  }
  return acc;
}

Poly1 Poly1::derivative() const {
  if (c_.size() <= 1) return Poly1();
  std::vector<Rational> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<unsigned long>(k);
  return Poly1(std::move(d));
}

Poly1 Poly1::compose(const Poly1& inner) const {
  Poly1 acc;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * inner + constant(*it);
  return acc;
}

Poly1 Poly1::divide_by_x_power(unsigned k) const {
  for (unsigned i = 0; i < k && i < c_.size(); ++i)
    if (c_[i] != 0) throw Error(Errc::InvalidArgument, "polynomial not divisible by x^" + std::to_string(k));
  if (c_.size() <= k) return Poly1();
  return Poly1(std::vector<Rational>(c_.begin() + k, c_.end()));
}

Poly1 operator+(const Poly1& a, const Poly1& b) {
  std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.coeff(k) + b.coeff(k);
  return Poly1(std::move(v));
}

Poly1 operator-(const Poly1& a, const Poly1& b) { return a + Rational(-1) * b; }

Poly1 operator*(const Poly1& a, const Poly1& b) {
  if (a.is_zero() || b.is_zero()) return Poly1();
  std::vector<Rational> v(a.c_.size() + b.c_.size() - 1);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  return Poly1(std::move(v));
}

Poly1 operator*(const Rational& s, const Poly1& p) {
  std::vector<Rational> v(p.c_);
  for (auto& c : v) c *= s;
  return Poly1(std::move(v));
}

namespace {

std::string monomial_text(unsigned i, unsigned j) {
  std::string out;
  auto part = [&](const char* var, unsigned e) {
    if (e == 0) return;
    if (!out.empty()) out += "*";
    out += var;
    if (e > 1) out += "^" + std::to_string(e);
  };
  part("x", i);
  part("y", j);
  return out;
}

void append_term(std::string& out, const Rational& c, const std::string& mono) {
  bool neg = c < 0;
  Rational a = abs(c);
  if (out.empty())
    out += neg ? "-" : "";
  else
    out += neg ? " - " : " + ";
  if (mono.empty())
    out += to_string(a);
  else if (a == 1)
    out += mono;
  else
    out += to_string(a) + "*" + mono;
}

}  // namespace

std::string Poly1::to_string() const {
  std::string out;
  for (unsigned k = 0; k < c_.size(); ++k)
    if (c_[k] != 0) append_term(out, c_[k], monomial_text(k, 0));
  return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------- Poly2

void Poly2::add_term(const Key& k, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(k, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly2 Poly2::constant(const Rational& c) { return monomial(c, 0, 0); }

Poly2 Poly2::monomial(const Rational& c, unsigned i, unsigned j) {
  Poly2 p;
  p.add_term({i, j}, c);
  return p;
}

Poly2 Poly2::from_x(const Poly1& q) {
  Poly2 p;
  for (unsigned k = 0; k < q.coeffs().size(); ++k) p.add_term({k, 0}, q.coeffs()[k]);
  return p;
}

Rational Poly2::coeff(unsigned i, unsigned j) const {
  auto it = terms_.find({i, j});
  return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Poly2::total_degree() const {
  unsigned d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first + k.second);
  return d;
}

unsigned Poly2::degree_x() const {
  unsigned d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first);
  return d;
}

unsigned Poly2::degree_y() const {
  unsigned d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.second);
  return d;
}

RInterval Poly2::eval_interval(const RInterval& x, const RInterval& y) const {
  RInterval acc(Rational(0));
  for (const auto& [k, c] : terms_) acc += RInterval(c) * ipow(x, k.first) * ipow(y, k.second);
  return acc;
}

Poly2 Poly2::partial_x() const {
  Poly2 p;
  for (const auto& [k, c] : terms_)
    if (k.first > 0) p.add_term({k.first - 1, k.second}, c * k.first);
  return p;
}

Poly2 Poly2::partial_y() const {
  Poly2 p;
  for (const auto& [k, c] : terms_)
    if (k.second > 0) p.add_term({k.first, k.second - 1}, c * k.second);
  return p;
}

Poly1 Poly2::substitute_y(const Poly1& u) const {
  unsigned dy = degree_y();
  std::vector<Poly1> upow{Poly1::constant(1)};
  for (unsigned k = 1; k <= dy; ++k) upow.push_back(upow.back() * u);
  Poly1 acc;
  for (const auto& [k, c] : terms_) acc = acc + Poly1::monomial(c, k.first) * upow[k.second];
  return acc;
}

Poly2 Poly2::swapped() const {
  Poly2 p;
  for (const auto& [k, c] : terms_) p.add_term({k.second, k.first}, c);
  return p;
}

Poly2 Poly2::reflected() const {
  Poly2 p;
  for (const auto& [k, c] : terms_) p.add_term(k, (k.first + k.second) % 2 == 0 ? c : Rational(-c));
  return p;
}

std::optional<Poly1> Poly2::graph_form() const {
  Rational lead = coeff(0, 1);
  if (lead == 0) return std::nullopt;
  std::vector<Rational> q(degree_x() + 1);
  for (const auto& [k, c] : terms_) {
    if (k.second == 0)
      q[k.first] = -c / lead;
    else if (k != Key{0, 1})
      return std::nullopt;
  }
  return Poly1(std::move(q));
}

Poly2 operator+(const Poly2& a, const Poly2& b) {
  Poly2 p = a;
  for (const auto& [k, c] : b.terms_) p.add_term(k, c);
  return p;
}

Poly2 operator-(const Poly2& a, const Poly2& b) { return a + Rational(-1) * b; }

Poly2 operator*(const Poly2& a, const Poly2& b) {
  Poly2 p;
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) p.add_term({ka.first + kb.first, ka.second + kb.second}, ca * cb);
  return p;
}

Poly2 operator*(const Rational& s, const Poly2& q) {
  Poly2 p;
  for (const auto& [k, c] : q.terms_) p.add_term(k, s * c);
  return p;
}

std::string Poly2::to_string() const {
  std::vector<std::pair<Key, Rational>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    unsigned da = a.first.first + a.first.second, db = b.first.first + b.first.second;
    if (da != db) return da < db;
    return a.first.first > b.first.first;
  });
  std::string out;
  for (const auto& [k, c] : ordered) append_term(out, c, monomial_text(k.first, k.second));
  return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------- parser

namespace {

class ExprParser {
 public:
  ExprParser(std::string_view text, bool allow_y) : s_(text), allow_y_(allow_y) {}

  Poly2 parse() {
    Poly2 p = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw Error(Errc::Syntax, "polynomial '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Poly2 expr() {
    Poly2 acc = term();
    for (;;) {
      if (eat('+'))
        acc = acc + term();
      else if (eat('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  Poly2 term() {
    Poly2 acc = unary();
    for (;;) {
      if (eat('*')) {
        acc = acc * unary();
      } else if (eat('/')) {
        Poly2 d = unary();
        if (d.total_degree() != 0 || d.is_zero()) fail("division by a non-constant or zero");
        acc = Rational(1 / d.coeff(0, 0)) * acc;
      } else {
        return acc;
      }
    }
  }

  Poly2 unary() {
    if (eat('-')) return Rational(-1) * unary();
    if (eat('+')) return unary();
    return power();
  }

  Poly2 power() {
    Poly2 base = atom();
    if (!eat('^')) return base;
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected exponent");
    unsigned e = static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start))));
    Poly2 out = Poly2::constant(1);
    for (unsigned k = 0; k < e; ++k) out = out * base;
    return out;
  }

  Poly2 atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Poly2 p = expr();
      if (!eat(')')) fail("expected ')'");
      return p;
    }
    if (c == 'x') {
      ++pos_;
      return Poly2::monomial(1, 1, 0);
    }
    if (c == 'y') {
      if (!allow_y_) fail("variable y not allowed in a univariate polynomial");
      ++pos_;
      return Poly2::monomial(1, 0, 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      Rational v(Integer(std::string(s_.substr(start, pos_ - start)), 10));
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        std::size_t fs = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string frac(s_.substr(fs, pos_ - fs));
        if (!frac.empty()) {
          Integer scale = 1;
          for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
          v += ratio(Integer(frac, 10), scale);
        }
        v.canonicalize();
      }
      return Poly2::constant(v);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  bool allow_y_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly2 Poly2::parse(std::string_view text) { return ExprParser(text, true).parse(); }

Poly1 Poly1::parse(std::string_view text) {
  Poly2 p = ExprParser(text, false).parse();
  std::vector<Rational> v(p.degree_x() + 1);
  for (const auto& [k, c] : p.terms()) v[k.first] = c;
  return Poly1(std::move(v));
}

}  // namespace ccsp
