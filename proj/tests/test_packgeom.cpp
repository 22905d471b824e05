#include <doctest.h>

#include "ccsp/error.hpp"
#include "ccsp/formula_io.hpp"
#include "ccsp/packgeom.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace ccsp;

namespace {

std::vector<Point> moved(const ConvexPolygon& p, const RigidMotion& m) {
  std::vector<Point> out;
  for (const Point& v : p.vertices()) out.push_back(m.apply(v));
  return out;
}

std::vector<std::string> fixture_names(const char* prefix) {
  std::vector<std::string> out;
  for (int i = 1; i <= 10; ++i) out.push_back(std::string(prefix) + (i < 10 ? "_0" : "_") + std::to_string(i));
  return out;
}

std::string violation_key(const PlacementViolation& v) {
  return v.kind == ViolationKind::Overlap ? "overlap " + std::to_string(v.piece) + " " + std::to_string(v.other)
                                          : "outside " + std::to_string(v.piece);
}

/// The witness lies strictly outside the container but in the closed piece, or in both open pieces.
bool witness_ok(const PackingInstance& inst, const std::vector<RigidMotion>& ms, const PlacementViolation& v) {
  auto piece = moved(inst.pieces[v.piece], ms[v.piece]);
  if (v.kind == ViolationKind::OutsideContainer)
    return oracle::locate_point(inst.container.vertices(), v.witness) < 0 && oracle::locate_point(piece, v.witness) >= 0;
  auto other = moved(inst.pieces[v.other], ms[v.other]);
  return oracle::locate_point(piece, v.witness) > 0 && oracle::locate_point(other, v.witness) > 0;
}

const char* kExample = R"(signature CCI(F,G) delta 1/8
fun F poly2 "(x-1)*(y-1) - 1"
fun G poly2 "(x-1)^2 + (y/4-1)^2 - 2"
var x1; var x2; var x3
add x2 x3 x1
impl-geq x1 x2 F
impl-geq x1 x2 G
nonneg x1
)";

}  // namespace

TEST_CASE("polygon validation") {
  CHECK_NOTHROW(ConvexPolygon({{0, 0}, {1, 0}, {0, 1}}));
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {0, 1}, {1, 0}}), Error);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {2, 0}, {0, 1}}), Error);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}}), Error);
  CHECK_THROWS_AS(SimplePolygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
  SimplePolygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  CHECK(cw.area() == 1);
  CHECK(cw.convex());
  SimplePolygon ell({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  CHECK_FALSE(ell.convex());
  CHECK(ell.locate({Rational(3, 2), Rational(3, 2)}) == -1);
  CHECK(ell.locate({1, 1}) == 0);
  CHECK(ell.locate({Rational(1, 2), Rational(3, 2)}) == 1);
}

TEST_CASE("rigid motions") {
  CHECK_THROWS_AS(RigidMotion::make(1, 1, 0, 0), Error);
  RigidMotion r = RigidMotion::make(Rational(3, 5), Rational(4, 5), 1, 2);
  CHECK(r.apply({1, 0}) == Point{Rational(8, 5), Rational(14, 5)});
  RigidMotion q = RigidMotion::make(0, 1, 0, 0);
  RigidMotion rq = r.compose(q);
  for (Point p : {Point{1, 0}, Point{2, 3}, Point{Rational(-1, 2), 5}}) CHECK(rq.apply(p) == r.apply(q.apply(p)));
  for (double theta : {0.1, 1.0, 2.5, -0.7}) {
    RigidMotion m = pythagorean_rotation(theta, 1e-6);
    CHECK(m.c * m.c + m.s * m.s == 1);
    CHECK(std::abs(std::remainder(std::atan2(m.s.get_d(), m.c.get_d()) - theta, 2 * M_PI)) <= 1e-6);
  }
}

TEST_CASE("placement fixtures: valid ones pass") {
  for (const auto& name : fixture_names("valid")) {
    auto fx = oracle::load_fixture(name);
    PlacementReport r = verify_placement(fx.instance, fx.motions);
    CHECK_MESSAGE(r.ok(), name << ": " << r.to_text());
    CHECK(r.slack >= 0);
  }
}

TEST_CASE("placement fixtures: invalid ones fail with witnesses") {
  for (const auto& name : fixture_names("invalid")) {
    auto fx = oracle::load_fixture(name);
    PlacementReport r = verify_placement(fx.instance, fx.motions);
    std::vector<std::string> got;
    for (const auto& v : r.violations) {
      got.push_back(violation_key(v));
      CHECK_MESSAGE(witness_ok(fx.instance, fx.motions, v), name << ": bad witness " << to_string(v.witness));
    }
    CHECK_MESSAGE(got == fx.expected, name << ": " << r.to_text());
  }
}

TEST_CASE("containment witness semantics on a convex container") {
  auto fx = oracle::load_fixture("invalid_01");
  PlacementReport r = verify_placement(fx.instance, fx.motions);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].container_edge.has_value());
  CHECK(r.violations[0].witness.x == Rational(3, 2));
}

TEST_CASE("non-convex container: every vertex inside, an edge crosses the notch") {
  auto fx = oracle::load_fixture("invalid_04");
  for (const Point& v : moved(fx.instance.pieces[0], fx.motions[0]))
    CHECK(oracle::locate_point(fx.instance.container.vertices(), v) >= 0);
  CHECK_FALSE(verify_placement(fx.instance, fx.motions).ok());
}

TEST_CASE("motion count mismatch") {
  auto fx = oracle::load_fixture("valid_02");
  fx.motions.pop_back();
  try {
    verify_placement(fx.instance, fx.motions);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MotionCountMismatch);
  }
}

TEST_CASE("verdicts are invariant under a global motion and piece order") {
  std::mt19937_64 rng(5);
  const RigidMotion global = RigidMotion::make(Rational(5, 13), Rational(-12, 13), Rational(7, 3), -4);
  auto names = fixture_names("valid");
  for (const auto& n : fixture_names("invalid")) names.push_back(n);
  for (const auto& name : names) {
    auto fx = oracle::load_fixture(name);
    const PlacementReport base = verify_placement(fx.instance, fx.motions);
    std::vector<Point> box;
    for (const Point& v : fx.instance.container.vertices()) box.push_back(global.apply(v));
    std::vector<std::size_t> perm(fx.instance.pieces.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PackingInstance inst{SimplePolygon(box), {}};
    std::vector<RigidMotion> ms;
    for (std::size_t i : perm) {
      inst.pieces.push_back(fx.instance.pieces[i]);
      ms.push_back(global.compose(fx.motions[i]));
    }
    const PlacementReport r = verify_placement(inst, ms);
    CHECK_MESSAGE(r.ok() == base.ok(), name);
    CHECK(r.violations.size() == base.violations.size());
    CHECK(r.slack == base.slack);
    for (const auto& v : r.violations) CHECK(witness_ok(inst, ms, v));
  }
}

TEST_CASE("instance and placement text round trip") {
  for (const char* name : {"valid_04", "valid_10", "invalid_08"}) {
    auto fx = oracle::load_fixture(name);
    PackingInstance back = parse_instance(serialize_instance(fx.instance));
    CHECK(back.container.vertices() == fx.instance.container.vertices());
    REQUIRE(back.pieces.size() == fx.instance.pieces.size());
    for (std::size_t i = 0; i < back.pieces.size(); ++i)
      CHECK(back.pieces[i].vertices() == fx.instance.pieces[i].vertices());
    auto ms = parse_placement(serialize_placement(fx.motions));
    REQUIRE(ms.size() == fx.motions.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
      CHECK(ms[i].c == fx.motions[i].c);
      CHECK(ms[i].s == fx.motions[i].s);
      CHECK(ms[i].tx == fx.motions[i].tx);
      CHECK(ms[i].ty == fx.motions[i].ty);
    }
    const std::string svg = render_placement_svg(fx.instance, fx.motions);
    CHECK(svg == render_placement_svg(fx.instance, fx.motions));
    CHECK(svg.rfind("<svg", 0) == 0);
  }
  CHECK_THROWS_AS(parse_instance("piece 0 0 1 0 0 1\n"), Error);
  CHECK_THROWS_AS(parse_instance("container 0 0 1 0 0 1\nblob 1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_placement("motion 1 1 0 0\n"), Error);
}

TEST_CASE("gramophone and line separation") {
  GramophoneReport at0 = gramophone_certificate(gramophone_corner(0, 0), {1, 1});
  CHECK(at0.dist2 == 2);
  CHECK(at0.satisfied);
  CHECK(at0.margin == 0);
  CHECK(line_separation2(1, 1, 0, 2) == 2);
  CHECK(line_separation2(3, 4, 0, 5) == 1);
  CHECK_THROWS_AS(line_separation2(0, 0, 1, 2), Error);
  for (int i = -8; i <= 8; ++i)
    for (int j = -8; j <= 8; ++j) {
      Rational x = ratio(i, 64), y = ratio(j, 64);
      GramophoneReport r = gramophone_certificate(gramophone_corner(x, y), {1, 1});
      CHECK(r.margin == packing_g().eval(x, y));
    }
}

TEST_CASE("teeter shift matches the reflected lane") {
  TeeterReport r = teeter_shift(0, 0);
  CHECK(r.product == 1);
  CHECK(r.satisfied);
  CHECK(r.agrees);
  TeeterReport s = teeter_shift(Rational(-1, 8), Rational(1, 16));
  CHECK(s.product == Rational(7, 8) * Rational(17, 16));
  CHECK_FALSE(s.satisfied);
  CHECK(s.agrees);
  for (int i = -8; i <= 8; ++i)
    for (int j = -8; j <= 8; ++j) CHECK(teeter_shift(ratio(i, 64), ratio(j, 64)).agrees);
}

TEST_CASE("gadget sequence covers each box once") {
  Formula f = parse_formula(kExample);
  WiringDiagram d = build_diagram(f);
  GadgetSeq g = gadget_sequence(d);
  CHECK(g.lanes == d.wires.size());
  CHECK(g.count(GadgetKind::Anchor) == 2 * f.num_vars());
  CHECK(g.count(GadgetKind::Swap) == d.swap_count());
  CHECK(g.count(GadgetKind::Adder) == 2);
  CHECK(g.count(GadgetKind::TeeterTotter) == 1);
  CHECK(g.count(GadgetKind::WobblyGramophone) == 1);
  CHECK(g.count(GadgetKind::ConstLaneOpen) == g.count(GadgetKind::ConstLaneClose));
  CHECK(gadget_bijection(d, g));
  CHECK(g.to_text(f).find("teeter-totter x1 x2") != std::string::npos);

  GadgetSeq dup = g;
  for (const Gadget& x : g.gadgets)
    if (x.kind == GadgetKind::Adder) dup.gadgets.push_back(x);
  CHECK_FALSE(gadget_bijection(d, dup));

  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    Formula r = oracle::random_cci(rng, 2 + t % 8, 6);
    WiringDiagram rd = build_diagram(r);
    CHECK(gadget_bijection(rd, gadget_sequence(rd)));
  }
}

TEST_CASE("variable intervals") {
  Formula f = parse_formula(kExample + std::string("eqc x3 1/8\n"));
  const Rational d(1, 8);
  CHECK(interval_of(f, Var{0}).lo == 0);
  CHECK(interval_of(f, Var{0}).hi == d);
  CHECK(interval_of(f, Var{1}).lo == -d);
  CHECK(interval_of(f, Var{2}).lo == d);
  CHECK(interval_of(f, Var{2}).hi == d);
  CHECK_THROWS_AS(interval_of(parse_formula("var x\n"), Var{0}), Error);
}
