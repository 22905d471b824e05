#pragma once

#include "ccsp/rational.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

namespace ccsp {

/// Closed interval [lo, hi] with outward-exact arithmetic over an ordered field.
template <class T>
struct Interval {
  T lo;
  T hi;

  Interval() : lo(0), hi(0) {}
  Interval(const T& point) : lo(point), hi(point) {}
  Interval(const T& l, const T& h) : lo(l), hi(h) {}

  static Interval hull(std::initializer_list<T> values) {
    T l = *values.begin(), h = *values.begin();
    for (const T& v : values) {
      if (v < l) l = v;
      if (h < v) h = v;
    }
    return {l, h};
  }

  bool contains(const T& x) const { return lo <= x && x <= hi; }
  bool contains_zero() const { return lo <= 0 && 0 <= hi; }
  bool is_point() const { return lo == hi; }
  T width() const { return T(hi - lo); }
  T mid() const { return T((lo + hi) / 2); }
  T mag() const {
    T a = lo < 0 ? T(-lo) : lo;
    T b = hi < 0 ? T(-hi) : hi;
    return a < b ? b : a;
  }

  friend Interval operator+(const Interval& a, const Interval& b) { return {T(a.lo + b.lo), T(a.hi + b.hi)}; }
  friend Interval operator-(const Interval& a, const Interval& b) { return {T(a.lo - b.hi), T(a.hi - b.lo)}; }
  friend Interval operator-(const Interval& a) { return {T(-a.hi), T(-a.lo)}; }
  friend Interval operator*(const Interval& a, const Interval& b) {
    return hull({T(a.lo * b.lo), T(a.lo * b.hi), T(a.hi * b.lo), T(a.hi * b.hi)});
  }
  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
};

/// Tight power: even powers of an interval straddling zero start at zero.
template <class T>
Interval<T> ipow(const Interval<T>& x, unsigned n) {
  if (n == 0) return Interval<T>(T(1));
  auto p = [](const T& v, unsigned k) {
    T r(1);
    for (unsigned i = 0; i < k; ++i) r = T(r * v);
    return r;
  };
  T a = p(x.lo, n), b = p(x.hi, n);
  if (n % 2 == 1) return {a, b};
  if (x.lo >= 0) return {a, b};
  if (x.hi <= 0) return {b, a};
  return {T(0), a < b ? b : a};
}

template <class T>
Interval<T> intersect(const Interval<T>& a, const Interval<T>& b, bool* empty) {
  Interval<T> out(a.lo < b.lo ? b.lo : a.lo, a.hi < b.hi ? a.hi : b.hi);
  *empty = out.hi < out.lo;
  return out;
}

using RInterval = Interval<Rational>;

inline std::string to_string(const RInterval& i) { return "[" + to_string(i.lo) + ", " + to_string(i.hi) + "]"; }

}  // namespace ccsp
