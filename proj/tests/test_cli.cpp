#include <doctest.h>

#include "ccsp/cli.hpp"
#include "ccsp/formula_io.hpp"
#include "support/oracles.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ccsp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ccsp-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result invoke(const RunConfig& c) {
  std::ostringstream out, err;
  int code = run(c, out, err);
  return {code, out.str(), err.str()};
}

const char* kAmi = "var x; var y; var z\neqc x 1/2\nadd x x y\nmul x y z\n";
const std::string kFixtures = std::string(CCSP_SOURCE_DIR) + "/tests/fixtures/placements/";

}  // namespace

TEST_CASE("cli validate") {
  TempDir t;
  RunConfig c;
  c.command = "validate";
  c.inputs = {t.write("a.ccsp", kAmi)};
  Result r = invoke(c);
  CHECK(r.code == 0);
  CHECK(r.out.find("signature AMI_HALF") != std::string::npos);
  CHECK(r.out.find("\nok\n") != std::string::npos);

  c.inputs = {t.write("bad.ccsp", "var x\nfrobnicate x\n")};
  r = invoke(c);
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);

  c.inputs = {(t.path / "missing.ccsp").string()};
  CHECK(invoke(c).code == 2);
}

TEST_CASE("cli reduce writes the formula and its provenance") {
  TempDir t;
  RunConfig c;
  c.command = "reduce";
  c.inputs = {t.write("a.ccsp", kAmi)};
  c.passes = {"ami2sq"};
  c.output = (t.path / "out.ccsp").string();
  Result r = invoke(c);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  Formula sq = parse_formula(oracle::read_file(*c.output));
  CHECK(sq.tag().kind == SignatureKind::Square1);
  CHECK(fs::exists(*c.output + ".prov"));

  RunConfig s = c;
  s.output.reset();
  s.out_dir = t.path.string();
  r = invoke(s);
  CHECK(r.code == 0);
  CHECK(parse_formula(r.out) == sq);
  CHECK(fs::exists(t.path / "a.ami2sq.prov"));
}

TEST_CASE("cli full pipeline keeps stages") {
  TempDir t;
  RunConfig c;
  c.command = "reduce";
  c.inputs = {t.write("a.ccsp", kAmi)};
  c.passes = {"full"};
  c.F = "(x-1)*(y-1) - 1";
  c.G = "(x-1)^2 + (y/4-1)^2 - 2";
  c.test_L = 2;
  c.keep_stages = true;
  c.out_dir = t.path.string();
  c.output = (t.path / "final.ccsp").string();
  Result r = invoke(c);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(parse_formula(oracle::read_file(*c.output)).tag().kind == SignatureKind::Cci);
  CHECK(fs::exists(t.path / "stage-0-ami2sq.ccsp"));
  CHECK(fs::exists(t.path / "stage-0-ami2sq.prov"));

  // The CCI result feeds straight into the wiring command.
  RunConfig w;
  w.command = "wiring";
  w.inputs = {*c.output};
  w.gadgets = true;
  r = invoke(w);
  CHECK_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.rfind("wiring diagram:", 0) == 0);
  CHECK(r.out.find("wobbly-gramophone") != std::string::npos);

  w.output = (t.path / "w.txt").string();
  r = invoke(w);
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(oracle::read_file(*w.output).find("wobbly-gramophone") != std::string::npos);
}

TEST_CASE("cli rejects mismatched pass chains") {
  TempDir t;
  RunConfig c;
  c.command = "reduce";
  c.inputs = {t.write("a.ccsp", kAmi)};
  c.passes = {"sq2ce"};
  c.f = "x^2";
  Result r = invoke(c);
  CHECK(r.code == 2);
  CHECK(r.err.find("cannot take a AMI_HALF") != std::string::npos);
  c.passes = {"no-such-pass"};
  CHECK(invoke(c).code == 2);
}

TEST_CASE("cli verify") {
  TempDir t;
  RunConfig c;
  c.command = "verify";
  const std::string f = t.write("a.ccsp", kAmi);
  c.inputs = {f, t.write("good.asg", "x = 1/2\ny = 1\nz = 1/2\n")};
  CHECK(invoke(c).code == 0);
  c.inputs = {f, t.write("bad.asg", "x = 1/2\ny = 1\nz = 1\n")};
  Result r = invoke(c);
  CHECK(r.code == 1);
  CHECK_FALSE(r.out.empty());
}

TEST_CASE("cli equisat on one pass") {
  TempDir t;
  RunConfig c;
  c.command = "equisat";
  c.inputs = {t.write("a.ccsp", kAmi)};
  c.passes = {"ami2sq"};
  Result r = invoke(c);
  CHECK_MESSAGE(r.code == 0, r.out << r.err);
}

TEST_CASE("cli curvature") {
  RunConfig c;
  c.command = "curvature";
  c.poly2 = "(x-1)*(y-1) - 1";
  Result r = invoke(c);
  CHECK(r.code == 0);
  CHECK(r.out.find("kappa' = -1\n") != std::string::npos);
  CHECK(r.out.find("classification ConvexlyCurved") != std::string::npos);
  c.poly2 = "(x-1)^2 + (y/4-1)^2 - 2";
  r = invoke(c);
  CHECK(r.out.find("kappa' = 1/2\n") != std::string::npos);
  c.poly2 = "x^2 + y^2 + 1";
  CHECK(invoke(c).code == 1);
}

TEST_CASE("cli pack-verify") {
  TempDir t;
  RunConfig c;
  c.command = "pack-verify";
  c.inputs = {kFixtures + "valid_04.inst", kFixtures + "valid_04.place"};
  c.svg = (t.path / "p.svg").string();
  Result r = invoke(c);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("violations 0", 0) == 0);
  CHECK(fs::exists(*c.svg));
  c.svg.reset();
  c.inputs = {kFixtures + "invalid_02.inst", kFixtures + "invalid_02.place"};
  r = invoke(c);
  CHECK(r.code == 1);
  CHECK(r.out.find("overlap piece 0 other 1") != std::string::npos);
  c.inputs = {kFixtures + "invalid_02.inst", kFixtures + "valid_01.place"};
  CHECK(invoke(c).code == 2);
}

TEST_CASE("cli identity-check") {
  RunConfig c;
  c.command = "identity-check";
  c.samples = 300;
  c.seed = 7;
  Result r = invoke(c);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("samples 300", 0) == 0);
}
