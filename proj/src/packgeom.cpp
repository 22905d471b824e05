#include "ccsp/packgeom.hpp"

#include "ccsp/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ccsp {

Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
Rational cross(const Point& a, const Point& b) { return a.x * b.y - a.y * b.x; }
Rational dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
std::string to_string(const Point& p) { return "(" + to_string(p.x) + ", " + to_string(p.y) + ")"; }

Rational signed_area2(const std::vector<Point>& v) {
  Rational s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return s;
}

namespace {

Point scale(const Point& p, const Rational& k) { return {p.x * k, p.y * k}; }

int orient(const Point& a, const Point& b, const Point& c) { return sign(cross(b - a, c - a)); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return orient(a, b, p) == 0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

/// Closed segments share a point.
bool segments_meet(const Point& a, const Point& b, const Point& c, const Point& d) {
  int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b);
}

void require_distinct(const std::vector<Point>& v, const char* what) {
  if (v.size() < 3) throw Error(Errc::InvalidPolygon, std::string(what) + " needs at least three vertices");
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (v[i] == v[j]) throw Error(Errc::InvalidPolygon, std::string(what) + " repeats vertex " + to_string(v[i]));
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices) : v_(std::move(vertices)) {
  require_distinct(v_, "convex polygon");
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i)
    if (orient(v_[i], v_[(i + 1) % n], v_[(i + 2) % n]) <= 0)
      throw Error(Errc::InvalidPolygon, "polygon is not strictly convex and counterclockwise at " +
                                            to_string(v_[(i + 1) % n]));
  // Local left turns everywhere plus total turning of one revolution.
  if (signed_area2(v_) <= 0) throw Error(Errc::InvalidPolygon, "polygon is not counterclockwise");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_meet(v_[i], v_[(i + 1) % n], v_[j], v_[(j + 1) % n]))
        throw Error(Errc::InvalidPolygon, "polygon winds more than once");
    }
}

int ConvexPolygon::locate(const Point& p) const {
  int worst = 1;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    int o = orient(v_[i], v_[(i + 1) % v_.size()], p);
    if (o < 0) return -1;
    if (o == 0) worst = 0;
  }
  return worst;
}

SimplePolygon::SimplePolygon(std::vector<Point> vertices) : v_(std::move(vertices)) {
  require_distinct(v_, "container");
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point &a = v_[i], &b = v_[(i + 1) % n], &c = v_[j], &d = v_[(j + 1) % n];
      if (adjacent) {
        // Shared endpoint only; a fold-back overlaps along the edge.
        Point e1 = b - a, e2 = d - c;
        if (cross(e1, e2) == 0 && dot(e1, e2) < 0) throw Error(Errc::InvalidPolygon, "container folds back on itself");
      } else if (segments_meet(a, b, c, d)) {
        throw Error(Errc::InvalidPolygon, "container is not simple");
      }
    }
  Rational a2 = signed_area2(v_);
  if (a2 == 0) throw Error(Errc::InvalidPolygon, "container has zero area");
  if (a2 < 0) std::reverse(v_.begin(), v_.end());
  convex_ = true;
  for (std::size_t i = 0; i < n; ++i)
    if (orient(v_[i], v_[(i + 1) % n], v_[(i + 2) % n]) < 0) convex_ = false;
}

int SimplePolygon::locate(const Point& p) const {
  const std::size_t n = v_.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point &a = v_[i], &b = v_[(i + 1) % n];
    if (on_segment(a, b, p)) return 0;
    if ((a.y > p.y) != (b.y > p.y)) {
      Rational xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside ? 1 : -1;
}

RigidMotion RigidMotion::make(const Rational& c, const Rational& s, const Rational& tx, const Rational& ty) {
  if (c * c + s * s != 1)
    throw Error(Errc::InvalidMotion, "rotation (" + to_string(c) + ", " + to_string(s) + ") is not a unit pair");
  return {c, s, tx, ty};
}

Point RigidMotion::apply(const Point& p) const { return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty}; }

ConvexPolygon RigidMotion::apply(const ConvexPolygon& p) const {
  std::vector<Point> out;
  for (const Point& v : p.vertices()) out.push_back(apply(v));
  return ConvexPolygon(std::move(out));
}

RigidMotion RigidMotion::compose(const RigidMotion& o) const {
  Point t = apply(Point{o.tx, o.ty});
  return {c * o.c - s * o.s, s * o.c + c * o.s, t.x, t.y};
}

RigidMotion pythagorean_rotation(double theta, double tol) {
  if (!(tol > 0)) throw Error(Errc::InvalidArgument, "tolerance must be positive");
  theta = std::remainder(theta, 2 * M_PI);
  if (std::abs(std::abs(theta) - M_PI) <= tol) return {-1, 0, 0, 0};
  const double t = std::tan(theta / 2);
  for (long q = 1; q <= 1000000; ++q) {
    const double pd = std::round(t * static_cast<double>(q));
    if (std::abs(pd) > 1e15) break;
    const long p = static_cast<long>(pd);
    if (std::abs(2 * std::atan2(static_cast<double>(p), static_cast<double>(q)) - theta) <= tol) {
      Rational tt = ratio(p, q);
      Rational den = 1 + tt * tt;
      return RigidMotion::make(Rational((1 - tt * tt) / den), Rational(2 * tt / den), 0, 0);
    }
  }
  throw Error(Errc::BudgetExceeded, "no Pythagorean rotation within tolerance");
}

std::vector<Point> clip_convex(const std::vector<Point>& subject, const ConvexPolygon& clip) {
  std::vector<Point> cur = subject;
  const auto& cv = clip.vertices();
  for (std::size_t i = 0; i < cv.size() && !cur.empty(); ++i) {
    const Point a = cv[i], e = cv[(i + 1) % cv.size()] - a;
    std::vector<Point> next;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const Point &p = cur[j], &q = cur[(j + 1) % cur.size()];
      Rational sp = cross(e, p - a), sq = cross(e, q - a);
      if (sp >= 0) next.push_back(p);
      if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) next.push_back(p + scale(q - p, Rational(sp / (sp - sq))));
    }
    cur = std::move(next);
  }
  return cur;
}

std::optional<Point> separating_axis(const ConvexPolygon& a, const ConvexPolygon& b) {
  for (const ConvexPolygon* P : {&a, &b}) {
    const auto& v = P->vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      Point e = v[(i + 1) % v.size()] - v[i];
      Point n{e.y, -e.x};
      Rational amax = dot(n, a.vertices()[0]), amin = amax, bmax = dot(n, b.vertices()[0]), bmin = bmax;
      for (const Point& p : a.vertices()) {
        Rational d = dot(n, p);
        if (d > amax) amax = d;
        if (d < amin) amin = d;
      }
      for (const Point& p : b.vertices()) {
        Rational d = dot(n, p);
        if (d > bmax) bmax = d;
        if (d < bmin) bmin = d;
      }
      if (amax <= bmin || bmax <= amin) return n;
    }
  }
  return std::nullopt;
}

namespace {

Point least_penetration_axis(const ConvexPolygon& a, const ConvexPolygon& b) {
  std::optional<Point> best;
  Rational best_key;
  for (const ConvexPolygon* P : {&a, &b}) {
    const auto& v = P->vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      Point e = v[(i + 1) % v.size()] - v[i];
      Point n{e.y, -e.x};
      Rational amax = dot(n, a.vertices()[0]), amin = amax, bmax = dot(n, b.vertices()[0]), bmin = bmax;
      for (const Point& p : a.vertices()) {
        Rational d = dot(n, p);
        amax = std::max(amax, d);
        amin = std::min(amin, d);
      }
      for (const Point& p : b.vertices()) {
        Rational d = dot(n, p);
        bmax = std::max(bmax, d);
        bmin = std::min(bmin, d);
      }
      Rational pen = std::min(Rational(amax - bmin), Rational(bmax - amin));
      Rational key = pen * pen / dot(n, n);
      if (!best || key < best_key) {
        best = n;
        best_key = key;
      }
    }
  }
  return *best;
}

Point vertex_average(const std::vector<Point>& v) {
  Point s{0, 0};
  for (const Point& p : v) s = s + p;
  return scale(s, Rational(1, static_cast<long>(v.size())));
}

std::optional<PlacementViolation> containment(const SimplePolygon& box, const ConvexPolygon& piece, std::size_t idx) {
  PlacementViolation v;
  v.kind = ViolationKind::OutsideContainer;
  v.piece = idx;
  const auto& cv = box.vertices();
  const std::size_t n = cv.size();
  if (box.convex()) {
    for (std::size_t e = 0; e < n; ++e) {
      const Point a = cv[e], dir = cv[(e + 1) % n] - a;
      for (const Point& p : piece.vertices())
        if (cross(dir, p - a) < 0) {
          v.witness = p;
          v.container_edge = e;
          v.axis = Point{dir.y, -dir.x};
          v.detail = "vertex " + to_string(p) + " lies beyond container edge " + std::to_string(e);
          return v;
        }
    }
    return std::nullopt;
  }
  for (const Point& p : piece.vertices())
    if (box.locate(p) < 0) {
      v.witness = p;
      v.detail = "vertex " + to_string(p) + " lies outside the container";
      return v;
    }
  // A container edge whose chord through the piece is not part of the piece boundary cuts the interior.
  const auto& pv = piece.vertices();
  for (std::size_t e = 0; e < n; ++e) {
    const Point P = cv[e], Q = cv[(e + 1) % n], D = Q - P;
    Rational tin = 0, tout = 1;
    bool empty = false;
    for (std::size_t i = 0; i < pv.size() && !empty; ++i) {
      const Point a = pv[i], ed = pv[(i + 1) % pv.size()] - a;
      Rational c0 = cross(ed, P - a), c1 = cross(ed, D);
      if (c1 == 0) {
        if (c0 < 0) empty = true;
      } else {
        Rational t = -c0 / c1;
        if (c1 > 0) tin = std::max(tin, t);
        else tout = std::min(tout, t);
      }
    }
    if (empty || tin >= tout) continue;
    const Point mid = P + scale(D, Rational((tin + tout) / 2));
    if (piece.locate(mid) != 1) continue;
    const Point out{D.y, -D.x};
    Rational h = 1;
    for (int k = 0; k < 256; ++k, h /= 2) {
      Point w = mid + scale(out, h);
      if (piece.locate(w) == 1 && box.locate(w) == -1) {
        v.witness = w;
        v.container_edge = e;
        v.axis = out;
        v.detail = "container edge " + std::to_string(e) + " cuts the piece interior near " + to_string(mid);
        return v;
      }
    }
    v.witness = mid;
    v.container_edge = e;
    v.detail = "container edge " + std::to_string(e) + " cuts the piece interior at " + to_string(mid);
    return v;
  }
  const Point c = vertex_average(pv);
  if (box.locate(c) != 1) {
    v.witness = c;
    v.detail = "piece interior point " + to_string(c) + " lies outside the container";
    return v;
  }
  return std::nullopt;
}

}  // namespace

PlacementReport verify_placement(const PackingInstance& inst, const std::vector<RigidMotion>& motions) {
  if (motions.size() != inst.pieces.size())
    throw Error(Errc::MotionCountMismatch, std::to_string(inst.pieces.size()) + " pieces but " +
                                               std::to_string(motions.size()) + " motions");
  PlacementReport rep;
  std::vector<ConvexPolygon> placed;
  rep.slack = inst.container.area();
  for (std::size_t i = 0; i < inst.pieces.size(); ++i) {
    if (motions[i].c * motions[i].c + motions[i].s * motions[i].s != 1)
      throw Error(Errc::InvalidMotion, "motion " + std::to_string(i) + " is not rigid");
    placed.push_back(motions[i].apply(inst.pieces[i]));
    rep.slack -= placed.back().area();
  }
  for (std::size_t i = 0; i < placed.size(); ++i)
    if (auto v = containment(inst.container, placed[i], i)) rep.violations.push_back(std::move(*v));
  for (std::size_t i = 0; i < placed.size(); ++i)
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      if (separating_axis(placed[i], placed[j])) continue;
      PlacementViolation v;
      v.kind = ViolationKind::Overlap;
      v.piece = i;
      v.other = j;
      v.axis = least_penetration_axis(placed[i], placed[j]);
      v.witness = vertex_average(clip_convex(placed[i].vertices(), placed[j]));
      v.detail = "pieces " + std::to_string(i) + " and " + std::to_string(j) + " overlap at " + to_string(v.witness);
      rep.violations.push_back(std::move(v));
    }
  return rep;
}

std::string PlacementReport::to_text() const {
  std::ostringstream os;
  os << "violations " << violations.size() << ", slack " << to_string(slack) << "\n";
  for (const auto& v : violations) {
    os << (v.kind == ViolationKind::Overlap ? "overlap" : "outside") << " piece " << v.piece;
    if (v.kind == ViolationKind::Overlap) os << " other " << v.other;
    os << " witness " << to_string(v.witness);
    if (v.axis) os << " axis " << to_string(*v.axis);
    if (v.container_edge) os << " edge " << *v.container_edge;
    os << ": " << v.detail << "\n";
  }
  return os.str();
}

// ------------------------------------------------------------------ files

namespace {

std::vector<std::vector<std::string>> tokenize_lines(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::vector<Point> read_points(const std::vector<std::string>& toks, int line) {
  if (toks.size() % 2 != 1) throw ParseError(Errc::Syntax, "odd number of coordinates", line, 1);
  std::vector<Point> pts;
  for (std::size_t i = 1; i + 1 < toks.size(); i += 2) pts.push_back({parse_rational(toks[i]), parse_rational(toks[i + 1])});
  return pts;
}

std::string write_points(const char* kw, const std::vector<Point>& v) {
  std::string s = kw;
  for (const Point& p : v) s += " " + to_string(p.x) + " " + to_string(p.y);
  return s + "\n";
}

}  // namespace

PackingInstance parse_instance(std::string_view text) {
  std::optional<SimplePolygon> box;
  std::vector<ConvexPolygon> pieces;
  int line = 0;
  for (const auto& toks : tokenize_lines(text)) {
    ++line;
    if (toks[0] == "container") {
      if (box) throw ParseError(Errc::DuplicateName, "second container", line, 1);
      box.emplace(read_points(toks, line));
    } else if (toks[0] == "piece") {
      pieces.emplace_back(read_points(toks, line));
    } else {
      throw ParseError(Errc::UnknownKeyword, "unknown keyword '" + toks[0] + "'", line, 1);
    }
  }
  if (!box) throw Error(Errc::Syntax, "instance has no container");
  if (pieces.empty()) throw Error(Errc::Syntax, "instance has no pieces");
  return {std::move(*box), std::move(pieces)};
}

std::string serialize_instance(const PackingInstance& inst) {
  std::string s = write_points("container", inst.container.vertices());
  for (const auto& p : inst.pieces) s += write_points("piece", p.vertices());
  return s;
}

std::vector<RigidMotion> parse_placement(std::string_view text) {
  std::vector<RigidMotion> out;
  int line = 0;
  for (const auto& toks : tokenize_lines(text)) {
    ++line;
    if (toks[0] != "motion" || toks.size() != 5)
      throw ParseError(Errc::Syntax, "expected 'motion c s tx ty'", line, 1);
    out.push_back(RigidMotion::make(parse_rational(toks[1]), parse_rational(toks[2]), parse_rational(toks[3]),
                                    parse_rational(toks[4])));
  }
  return out;
}

std::string serialize_placement(const std::vector<RigidMotion>& motions) {
  std::string s;
  for (const auto& m : motions)
    s += "motion " + to_string(m.c) + " " + to_string(m.s) + " " + to_string(m.tx) + " " + to_string(m.ty) + "\n";
  return s;
}

std::string render_placement_svg(const PackingInstance& inst, const std::vector<RigidMotion>& motions) {
  const auto& cv = inst.container.vertices();
  double x0 = cv[0].x.get_d(), x1 = x0, y0 = cv[0].y.get_d(), y1 = y0;
  for (const Point& p : cv) {
    x0 = std::min(x0, p.x.get_d());
    x1 = std::max(x1, p.x.get_d());
    y0 = std::min(y0, p.y.get_d());
    y1 = std::max(y1, p.y.get_d());
  }
  const double size = 400, pad = 10;
  const double k = size / std::max({x1 - x0, y1 - y0, 1e-12});
  auto path = [&](const std::vector<Point>& v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? " L " : "M ") << pad + (v[i].x.get_d() - x0) * k << " " << pad + (y1 - v[i].y.get_d()) * k;
    os << " Z";
    return os.str();
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad << "\" height=\"" << size + 2 * pad
     << "\">\n";
  os << "<path d=\"" << path(cv) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < inst.pieces.size() && i < motions.size(); ++i)
    os << "<path d=\"" << path(motions[i].apply(inst.pieces[i]).vertices())
       << "\" fill=\"#88aadd\" fill-opacity=\"0.6\" stroke=\"#224\"/>\n";
  os << "</svg>\n";
  return os.str();
}

// ------------------------------------------------------------------ gadget semantics

const Poly2& packing_f() {
  static const Poly2 f = Poly2::parse("(x-1)*(y-1) - 1");
  return f;
}

const Poly2& packing_g() {
  static const Poly2 g = Poly2::parse("(x-1)^2 + (y/4 - 1)^2 - 2");
  return g;
}

GramophoneReport gramophone_certificate(const Point& c, const Point& p) {
  Point d = c - p;
  GramophoneReport r;
  r.dist2 = dot(d, d);
  r.margin = r.dist2 - 2;
  r.satisfied = r.margin >= 0;
  return r;
}

Rational line_separation2(const Rational& a, const Rational& b, const Rational& c1, const Rational& c2) {
  if (a == 0 && b == 0) throw Error(Errc::InvalidArgument, "degenerate line");
  Rational d = c1 - c2;
  return d * d / (a * a + b * b);
}

Point gramophone_corner(const Rational& x, const Rational& y) { return {x, y / 4}; }

TeeterReport teeter_shift(const Rational& x, const Rational& y) {
  TeeterReport r;
  r.product = (x + 1) * (y + 1);
  r.margin = r.product - 1;
  r.satisfied = r.margin >= 0;
  r.lane_f = packing_f().eval(Rational(-x), Rational(-y));
  r.agrees = r.satisfied == (r.lane_f >= 0);
  return r;
}

const char* gadget_kind_name(GadgetKind k) {
  switch (k) {
    case GadgetKind::Anchor: return "anchor";
    case GadgetKind::Swap: return "swap";
    case GadgetKind::Split: return "split";
    case GadgetKind::Adder: return "adder";
    case GadgetKind::TeeterTotter: return "teeter-totter";
    case GadgetKind::WobblyGramophone: return "wobbly-gramophone";
    case GadgetKind::ConstLaneOpen: return "k-lane-open";
    case GadgetKind::ConstLaneClose: return "k-lane-close";
  }
  return "?";
}

std::size_t GadgetSeq::count(GadgetKind k) const {
  return std::count_if(gadgets.begin(), gadgets.end(), [k](const Gadget& g) { return g.kind == k; });
}

std::string GadgetSeq::to_text(const Formula& f) const {
  std::ostringstream os;
  os << "gadgets " << gadgets.size() << ", lanes " << lanes << "\n";
  for (const Gadget& g : gadgets) {
    os << gadget_kind_name(g.kind);
    if (g.kind == GadgetKind::Adder) os << (g.leq ? " leq" : " geq");
    for (Var v : g.vars) os << " " << f.name(v);
    if (!g.lanes.empty()) {
      os << " lanes";
      for (auto l : g.lanes) os << " " << l;
    }
    if (g.box_column) os << " box " << *g.box_column;
    os << "\n";
  }
  return os.str();
}

GadgetSeq gadget_sequence(const WiringDiagram& d) {
  GadgetSeq seq;
  const std::uint32_t W = static_cast<std::uint32_t>(d.wires.size());
  seq.lanes = W;
  std::vector<std::uint32_t> track(W);
  for (std::uint32_t w = 0; w < W; ++w) track[w] = d.wires[w].track;
  std::vector<std::uint32_t> at(W);
  for (std::uint32_t w = 0; w < W; ++w) at[track[w]] = w;
  auto anchors = [&] {
    for (std::uint32_t v = 0; v < d.num_vars; ++v)
      seq.gadgets.push_back({GadgetKind::Anchor, {Var{v}}, {track[wire_of(Var{v}, WireDir::Right)],
                                                          track[wire_of(Var{v}, WireDir::Left)]}, false, {}});
  };
  anchors();
  for (std::size_t col = 0; col < d.events.size(); ++col) {
    if (const auto* s = std::get_if<SwapEvent>(&d.events[col])) {
      seq.gadgets.push_back({GadgetKind::Swap, {}, {s->upper, s->upper + 1}, false, {}});
      std::swap(at[s->upper], at[s->upper + 1]);
      track[at[s->upper]] = s->upper;
      track[at[s->upper + 1]] = s->upper + 1;
      continue;
    }
    const auto& box = std::get<ConstraintBox>(d.events[col]);
    std::vector<Var> vars;
    std::vector<std::uint32_t> lanes;
    for (const Tap& t : box.taps) {
      vars.push_back(d.wires[t.wire].variable);
      lanes.push_back(track[t.wire]);
    }
    switch (box.kind) {
      case BoxKind::AddLeq:
      case BoxKind::AddGeq:
        seq.gadgets.push_back({GadgetKind::Split, {vars[0]}, {lanes[0]}, false, {}});
        seq.gadgets.push_back({GadgetKind::Split, {vars[1]}, {lanes[1]}, false, {}});
        seq.gadgets.push_back({GadgetKind::Adder, vars, lanes, box.kind == BoxKind::AddLeq, col});
        break;
      case BoxKind::FBox:
        seq.gadgets.push_back({GadgetKind::Split, {vars[0]}, {lanes[0]}, false, {}});
        seq.gadgets.push_back({GadgetKind::Split, {vars[1]}, {lanes[1]}, false, {}});
        seq.gadgets.push_back({GadgetKind::TeeterTotter, vars, lanes, false, col});
        break;
      case BoxKind::GBox:
        // The constant k gets its own lane below the variable lanes.
        seq.gadgets.push_back({GadgetKind::ConstLaneOpen, {}, {W}, false, {}});
        seq.gadgets.push_back({GadgetKind::WobblyGramophone, vars, lanes, false, col});
        seq.gadgets.push_back({GadgetKind::ConstLaneClose, {}, {W}, false, {}});
        break;
    }
  }
  anchors();
  return seq;
}

bool gadget_bijection(const WiringDiagram& d, const GadgetSeq& g) {
  std::map<std::size_t, int> uses;
  for (const Gadget& x : g.gadgets) {
    if (!x.box_column) continue;
    if (*x.box_column >= d.events.size()) return false;
    const auto* box = std::get_if<ConstraintBox>(&d.events[*x.box_column]);
    if (!box) return false;
    bool kind_ok = (x.kind == GadgetKind::Adder && (box->kind == BoxKind::AddLeq) == x.leq &&
                    (box->kind == BoxKind::AddLeq || box->kind == BoxKind::AddGeq)) ||
                   (x.kind == GadgetKind::TeeterTotter && box->kind == BoxKind::FBox) ||
                   (x.kind == GadgetKind::WobblyGramophone && box->kind == BoxKind::GBox);
    if (!kind_ok) return false;
    ++uses[*x.box_column];
  }
  for (std::size_t col = 0; col < d.events.size(); ++col)
    if (std::holds_alternative<ConstraintBox>(d.events[col]) && uses[col] != 1) return false;
  return true;
}

RInterval interval_of(const Formula& f, Var x) {
  if (f.tag().kind != SignatureKind::Cci)
    throw Error(Errc::SignatureError, std::string("interval_of needs a CCI formula, got ") +
                                          signature_name(f.tag().kind));
  if (x.index >= f.num_vars()) throw Error(Errc::MissingVariable, "unknown variable");
  const Rational& delta = f.delta();
  bool nonneg = false;
  for (const auto& c : f.constraints()) {
    if (const auto* e = std::get_if<cons::EqConst>(&c); e && e->x == x && e->value == delta) return RInterval(delta);
    if (const auto* n = std::get_if<cons::Nonneg>(&c); n && n->x == x) nonneg = true;
  }
  return nonneg ? RInterval(Rational(0), delta) : RInterval(Rational(-delta), delta);
}

}  // namespace ccsp
