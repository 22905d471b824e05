#pragma once

#include "ccsp/formula.hpp"
#include "ccsp/interval.hpp"
#include "ccsp/poly.hpp"
#include "ccsp/rational.hpp"
#include "ccsp/wiring.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccsp {

struct Point {
  Rational x, y;
  friend bool operator==(const Point&, const Point&) = default;
};

Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Rational cross(const Point& a, const Point& b);
Rational dot(const Point& a, const Point& b);
std::string to_string(const Point& p);

/// Twice the signed area.
Rational signed_area2(const std::vector<Point>& v);

/// Counterclockwise, strictly convex, at least three distinct vertices. InvalidPolygon otherwise.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Point> vertices);
  const std::vector<Point>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  Rational area() const { return signed_area2(v_) / 2; }
  /// +1 strictly inside, 0 on the boundary, -1 outside.
  int locate(const Point& p) const;

 private:
  std::vector<Point> v_;
};

/// Simple polygon, stored counterclockwise.
class SimplePolygon {
 public:
  explicit SimplePolygon(std::vector<Point> vertices);
  const std::vector<Point>& vertices() const { return v_; }
  bool convex() const { return convex_; }
  Rational area() const { return signed_area2(v_) / 2; }
  /// +1 strictly inside, 0 on the boundary, -1 outside.
  int locate(const Point& p) const;

 private:
  std::vector<Point> v_;
  bool convex_ = false;
};

/// p -> R p + t with R = [[c, -s], [s, c]] and c^2 + s^2 = 1 exactly.
struct RigidMotion {
  Rational c = 1, s = 0, tx = 0, ty = 0;

  static RigidMotion make(const Rational& c, const Rational& s, const Rational& tx, const Rational& ty);
  static RigidMotion identity() { return {}; }
  Point apply(const Point& p) const;
  ConvexPolygon apply(const ConvexPolygon& p) const;
  /// this after other
  RigidMotion compose(const RigidMotion& other) const;
};

/// Rational unit pair (c, s) from t = tan(theta/2) with |angle - theta| <= tol.
RigidMotion pythagorean_rotation(double theta, double tol);

struct PackingInstance {
  SimplePolygon container;
  std::vector<ConvexPolygon> pieces;
};

enum class ViolationKind { OutsideContainer, Overlap };

struct PlacementViolation {
  ViolationKind kind = ViolationKind::Overlap;
  std::size_t piece = 0;
  /// Second piece for overlaps.
  std::size_t other = 0;
  /// A point of the piece strictly outside the container, or a point in both interiors.
  Point witness;
  /// Overlaps: the edge normal of least penetration. Containment: the container edge crossed, if convex.
  std::optional<Point> axis;
  std::optional<std::size_t> container_edge;
  std::string detail;
};

struct PlacementReport {
  std::vector<PlacementViolation> violations;
  /// Container area minus total piece area.
  Rational slack;

  bool ok() const { return violations.empty(); }
  std::string to_text() const;
};

PlacementReport verify_placement(const PackingInstance& inst, const std::vector<RigidMotion>& motions);

/// Separating axis among the edge normals of both polygons, if their interiors are disjoint.
std::optional<Point> separating_axis(const ConvexPolygon& a, const ConvexPolygon& b);

/// Intersection of two convex regions (possibly degenerate, possibly empty).
std::vector<Point> clip_convex(const std::vector<Point>& subject, const ConvexPolygon& clip);

PackingInstance parse_instance(std::string_view text);
std::string serialize_instance(const PackingInstance& inst);
std::vector<RigidMotion> parse_placement(std::string_view text);
std::string serialize_placement(const std::vector<RigidMotion>& motions);
std::string render_placement_svg(const PackingInstance& inst, const std::vector<RigidMotion>& motions);

/// (x-1)(y-1) - 1
const Poly2& packing_f();
/// (x-1)^2 + (y/4 - 1)^2 - 2
const Poly2& packing_g();

struct GramophoneReport {
  Rational dist2;
  bool satisfied = false;
  Rational margin;
};

/// |c - p|^2 >= 2, the green piece of width sqrt(2) fits between the corners.
GramophoneReport gramophone_certificate(const Point& c, const Point& p);

/// Squared distance between parallel lines a x + b y = c1 and a x + b y = c2.
Rational line_separation2(const Rational& a, const Rational& b, const Rational& c1, const Rational& c2);

/// Corner c of the pink piece in the gadget frame for variable values (x, y); p sits at (1, 1).
Point gramophone_corner(const Rational& x, const Rational& y);

struct TeeterReport {
  Rational product;
  bool satisfied = false;
  Rational margin;
  /// packing f at the left-oriented lane values (-x, -y).
  Rational lane_f;
  bool agrees = false;
};

/// Evaluates (x+1)(y+1) >= 1 and compares it with packing f at the reflected lane values.
TeeterReport teeter_shift(const Rational& x, const Rational& y);

enum class GadgetKind { Anchor, Swap, Split, Adder, TeeterTotter, WobblyGramophone, ConstLaneOpen, ConstLaneClose };

const char* gadget_kind_name(GadgetKind k);

struct Gadget {
  GadgetKind kind = GadgetKind::Anchor;
  std::vector<Var> vars;
  std::vector<std::uint32_t> lanes;
  /// Adders: true for x + y <= z.
  bool leq = false;
  /// Column of the wiring box this gadget encodes, for boxes.
  std::optional<std::size_t> box_column;
};

struct GadgetSeq {
  std::size_t lanes = 0;
  std::vector<Gadget> gadgets;

  std::size_t count(GadgetKind k) const;
  std::string to_text(const Formula& f) const;
};

GadgetSeq gadget_sequence(const WiringDiagram& d);

/// Every box column appears exactly once among Adder, TeeterTotter and WobblyGramophone gadgets.
bool gadget_bijection(const WiringDiagram& d, const GadgetSeq& g);

/// {delta} under x = delta, [0, delta] under x >= 0, [-delta, delta] otherwise.
RInterval interval_of(const Formula& f, Var x);

}  // namespace ccsp
