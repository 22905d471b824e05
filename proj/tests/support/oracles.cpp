#include "support/oracles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oracle {

namespace {

long double eval_ld(const Poly2& F, long double x, long double y) {
  long double s = 0;
  for (const auto& [e, c] : F.terms()) s += static_cast<long double>(c.get_d()) * std::pow(x, e.first) * std::pow(y, e.second);
  return s;
}

long double dy_ld(const Poly2& F, long double x, long double y) {
  long double s = 0;
  for (const auto& [e, c] : F.terms())
    if (e.second > 0)
      s += static_cast<long double>(c.get_d()) * e.second * std::pow(x, e.first) * std::pow(y, e.second - 1);
  return s;
}

std::optional<long double> newton(const Poly2& F, long double x, long double y) {
  for (int it = 0; it < 100; ++it) {
    long double d = dy_ld(F, x, y);
    if (d == 0) return std::nullopt;
    long double step = eval_ld(F, x, y) / d;
    y -= step;
    if (std::fabs(step) <= 1e-19L * (1 + std::fabs(y))) return y;
  }
  return std::fabs(eval_ld(F, x, y)) < 1e-15L ? std::optional<long double>(y) : std::nullopt;
}

}  // namespace

std::optional<long double> trace_curve(const Poly2& F, long double x) {
  const int steps = 64;
  long double y = 0;
  for (int i = 1; i <= steps; ++i) {
    auto next = newton(F, x * i / steps, y);
    if (!next) return std::nullopt;
    y = *next;
  }
  return y;
}

std::optional<FiniteJet> finite_jet(const Poly2& F, long double h) {
  // Five-point central stencil on x = 0, +-h, +-2h.
  auto p1 = trace_curve(F, h), m1 = trace_curve(F, -h), p2 = trace_curve(F, 2 * h), m2 = trace_curve(F, -2 * h);
  auto y0 = trace_curve(F, 0);
  if (!p1 || !m1 || !p2 || !m2 || !y0) return std::nullopt;
  return FiniteJet{(-*p2 + 8 * *p1 - 8 * *m1 + *m2) / (12 * h),
                   (-*p2 + 16 * *p1 - 30 * *y0 + 16 * *m1 - *m2) / (12 * h * h)};
}

std::optional<std::vector<Rational>> solve_linear(std::vector<std::vector<Rational>> A, std::vector<Rational> b) {
  const std::size_t rows = A.size(), cols = rows ? A[0].size() : 0;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && A[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(A[p], A[r]);
    std::swap(b[p], b[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || A[i][c] == 0) continue;
      Rational k = A[i][c] / A[r][c];
      for (std::size_t j = c; j < cols; ++j) A[i][j] -= k * A[r][j];
      b[i] -= k * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i)
    if (b[i] != 0) return std::nullopt;
  if (r < cols) return std::nullopt;
  std::vector<Rational> v(cols);
  for (std::size_t i = 0; i < r; ++i) v[pivot_col[i]] = b[i] / A[i][pivot_col[i]];
  return v;
}

std::optional<Rational> forced_ratio(const ccsp::Formula& f, ccsp::Var x, ccsp::Var y) {
  const std::size_t n = f.num_vars();
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  for (const auto& c : f.constraints()) {
    const auto* a = std::get_if<ccsp::cons::Add>(&c);
    if (!a) continue;
    std::vector<Rational> row(n, 0);
    row[a->x.index] += 1;
    row[a->y.index] += 1;
    row[a->z.index] -= 1;
    A.push_back(row);
    b.push_back(0);
  }
  std::vector<Rational> fix(n, 0);
  fix[y.index] = 1;
  A.push_back(fix);
  b.push_back(1);
  auto v = solve_linear(A, b);
  if (!v) return std::nullopt;
  return (*v)[x.index];
}

Rational random_rational(std::mt19937_64& rng, std::int64_t q, const Rational& bound) {
  Rational hi = bound * q;
  std::int64_t m = static_cast<std::int64_t>(floor(hi.get_d()));
  std::uniform_int_distribution<std::int64_t> d(-m, m);
  return ccsp::ratio(d(rng), q);
}

AmiSample random_ami(std::mt19937_64& rng, std::size_t n, std::size_t m, bool planted) {
  static const Rational kValues[] = {Rational(-1, 2), Rational(-1, 4), Rational(0), Rational(1, 4), Rational(1, 2)};
  std::vector<Rational> val(n);
  std::uniform_int_distribution<int> pick_val(0, 4);
  for (auto& v : val) v = kValues[pick_val(rng)];
  ccsp::FormulaBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.add_var("x" + std::to_string(i + 1));
  std::uniform_int_distribution<std::uint32_t> pick_var(0, static_cast<std::uint32_t>(n - 1));
  std::uniform_int_distribution<int> pick_kind(0, 9);
  std::size_t added = 0;
  for (std::size_t attempt = 0; attempt < 60 * m && added < m; ++attempt) {
    ccsp::Var x{pick_var(rng)}, y{pick_var(rng)}, z{pick_var(rng)};
    int k = pick_kind(rng);
    ccsp::Constraint c;
    bool ok;
    if (k < 4) {
      c = ccsp::cons::Add{x, y, z};
      ok = val[x.index] + val[y.index] == val[z.index];
    } else if (k < 7) {
      c = ccsp::cons::Mul{x, y, z};
      ok = val[x.index] * val[y.index] == val[z.index];
    } else {
      c = ccsp::cons::EqConst{x, Rational(1, 2)};
      ok = val[x.index] == Rational(1, 2);
    }
    if (planted && !ok) continue;
    b.add(c);
    ++added;
  }
  AmiSample s{b.build(), std::nullopt};
  if (planted) s.solution = val;
  return s;
}

ccsp::Formula random_cci(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  ccsp::FormulaBuilder b;
  ccsp::FnId F = b.add_function("F", Poly2::parse("(x-1)*(y-1) - 1"));
  ccsp::FnId G = b.add_function("G", Poly2::parse("(x-1)^2 + (y/4-1)^2 - 2"));
  b.set_tag({ccsp::SignatureKind::Cci, F, G, {}}).set_delta(Rational(1, 8));
  for (std::size_t i = 0; i < n; ++i) b.add_var("x" + std::to_string(i + 1));
  std::uniform_int_distribution<std::uint32_t> pick_var(0, static_cast<std::uint32_t>(n - 1));
  std::uniform_int_distribution<int> pick_kind(0, 9);
  for (std::size_t i = 0; i < m; ++i) {
    ccsp::Var x{pick_var(rng)}, y{pick_var(rng)}, z{pick_var(rng)};
    int k = pick_kind(rng);
    if (k < 4) b.add(ccsp::cons::Add{x, y, z});
    else if (k < 6) b.add(ccsp::cons::ImplicitGeq{x, y, F});
    else if (k < 8) b.add(ccsp::cons::ImplicitGeq{x, y, G});
    else if (k < 9) b.add(ccsp::cons::Nonneg{x});
    else b.add(ccsp::cons::EqConst{x, Rational(1, 8)});
  }
  return b.build();
}

Poly2 random_curve(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(-3, 3), nonzero(1, 3), sgn(0, 1), cubic(-2, 2);
  auto nz = [&] { return Rational(nonzero(rng) * (sgn(rng) ? 1 : -1)); };
  Poly2 F = Poly2::monomial(nz(), 1, 0) + Poly2::monomial(nz(), 0, 1);
  F = F + Poly2::monomial(small(rng), 2, 0) + Poly2::monomial(small(rng), 1, 1) + Poly2::monomial(small(rng), 0, 2);
  for (unsigned i = 0; i <= 3; ++i) F = F + Poly2::monomial(Rational(cubic(rng), 2), i, 3 - i);
  return F;
}


int locate_point(const std::vector<ccsp::Point>& poly, const ccsp::Point& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ccsp::Point& a = poly[i];
    const ccsp::Point& b = poly[(i + 1) % n];
    Rational cr = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cr == 0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
        p.y <= std::max(a.y, b.y))
      return 0;
    if ((a.y > p.y) != (b.y > p.y)) {
      Rational xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside ? 1 : -1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PlacementFixture load_fixture(const std::string& name) {
  const std::string base = std::string(CCSP_SOURCE_DIR) + "/tests/fixtures/placements/" + name;
  PlacementFixture fx{name, ccsp::parse_instance(read_file(base + ".inst")),
                      ccsp::parse_placement(read_file(base + ".place")), {}};
  std::istringstream ex(read_file(base + ".expect"));
  for (std::string line; std::getline(ex, line);)
    if (!line.empty()) fx.expected.push_back(line);
  return fx;
}

}  // namespace oracle
