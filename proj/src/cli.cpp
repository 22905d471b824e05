#include "ccsp/cli.hpp"

#include "ccsp/error.hpp"
#include "ccsp/formula_io.hpp"
#include "ccsp/funclib.hpp"
#include "ccsp/packgeom.hpp"
#include "ccsp/reductions.hpp"
#include "ccsp/verifier.hpp"
#include "ccsp/wiring.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace ccsp {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << text;
}

const std::string& input(const RunConfig& c, std::size_t i, const char* what) {
  if (c.inputs.size() <= i) throw UsageError(std::string("missing ") + what);
  return c.inputs[i];
}

fs::path out_dir(const RunConfig& c) {
  if (c.out_dir) return *c.out_dir;
  if (const char* env = std::getenv("CCSP_OUT_DIR"); env && *env) return env;
  return ".";
}

UnivariateFn need_f(const std::optional<std::string>& s, const char* flag) {
  if (!s) throw UsageError(std::string("this pass needs ") + flag);
  return Poly1::parse(*s);
}

Poly2 need_F(const std::optional<std::string>& s, const char* flag) {
  if (!s) throw UsageError(std::string("this pass needs ") + flag);
  return Poly2::parse(*s);
}

Orientation parse_orientation(const std::string& s) {
  Orientation o;
  for (char ch : s) {
    if (ch == 's') o.swap = true;
    else if (ch == 'f') o.flip = true;
    else if (ch != ',' && ch != '-') throw UsageError("orientation letters are 's' (swap) and 'f' (flip)");
  }
  return o;
}

ChainMode chain_mode(const RunConfig& c) { return c.test_L ? ChainMode::test(*c.test_L) : ChainMode::sound(); }

using Kinds = std::vector<SignatureKind>;

struct PassInfo {
  Kinds accepts;
  std::function<SignatureKind(SignatureKind)> produces;
};

const std::map<std::string, PassInfo>& pass_table() {
  using K = SignatureKind;
  auto to = [](K k) { return [k](K) { return k; }; };
  static const std::map<std::string, PassInfo> t = {
      {"ami2sq", {{K::AmiHalf}, to(K::Square1)}},
      {"sq2ce", {{K::Square1}, to(K::CeExpl)}},
      {"sq2cci", {{K::Square1}, to(K::CciExpl)}},
      {"cubic-rescale", {{K::CciExpl}, to(K::CciExpl)}},
      {"linear-normalize", {{K::CciExpl}, to(K::CciExpl)}},
      {"cci2ce", {{K::CciExpl}, to(K::CeExpl)}},
      {"implicit", {{K::CeExpl, K::CciExpl}, [](K k) { return k == K::CeExpl ? K::Ce : K::Cci; }}},
      {"signflip", {{K::Ce, K::Cci}, [](K k) { return k; }}},
      {"full", {{K::AmiHalf}, [](K) { return K::Ce; }}},
  };
  return t;
}

void check_chain(const std::vector<std::string>& passes, SignatureKind start, bool cci_target) {
  SignatureKind k = start;
  for (const auto& p : passes) {
    auto it = pass_table().find(p);
    if (it == pass_table().end()) throw UsageError("unknown pass '" + p + "'");
    const Kinds& ok = it->second.accepts;
    if (std::find(ok.begin(), ok.end(), k) == ok.end())
      throw UsageError("pass '" + p + "' cannot take a " + signature_name(k) + " formula");
    k = p == "full" && cci_target ? SignatureKind::Cci : it->second.produces(k);
  }
}

std::vector<ReductionOutput> run_pass(const std::string& name, const Formula& src, const RunConfig& c) {
  const Rational delta = parse_rational(c.delta);
  if (name == "ami2sq") return {ami_to_square1(src)};
  if (name == "sq2ce") return {square1_to_ce_expl(src, need_f(c.f, "--f"), delta, chain_mode(c))};
  if (name == "sq2cci")
    return {square1_to_cci_expl(src, need_f(c.f, "--f"), need_f(c.g, "--g"), delta, chain_mode(c))};
  if (name == "cubic-rescale") {
    auto f = need_f(c.f, "--f"), g = need_f(c.g, "--g");
    return {cubic_rescale_pass(src, f, g, rescale_cubic(f, g, src.delta()).N)};
  }
  if (name == "linear-normalize") return {linear_normalize_pass(src, need_f(c.f, "--f"), need_f(c.g, "--g"))};
  if (name == "cci2ce") return {cci_expl_to_ce_expl(src)};
  if (name == "implicit") {
    Poly2 F = need_F(c.F, "--F");
    if (src.tag().kind == SignatureKind::CciExpl) {
      Poly2 G = need_F(c.G, "--G");
      return {explicit_to_implicit(src, F, &G)};
    }
    return {explicit_to_implicit(src, F)};
  }
  if (name == "signflip") {
    Poly2 F = need_F(c.F, "--F");
    if (src.tag().kind == SignatureKind::Cci) {
      Poly2 G = need_F(c.G, "--G");
      return {signflip_wrap(src, F, parse_orientation(c.orient_F), &G, parse_orientation(c.orient_G))};
    }
    return {signflip_wrap(src, F, parse_orientation(c.orient_F))};
  }
  // full
  PipelineTarget t;
  t.F = need_F(c.F, "--F");
  if (c.G) {
    t.kind = SignatureKind::Cci;
    t.G = Poly2::parse(*c.G);
  }
  PipelineOptions opt{delta, chain_mode(c)};
  if (!c.test_L) opt.mode = ChainMode::sound();
  return std::move(pipeline(src, t, opt).stages);
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  Formula f = parse_formula(read_file(input(c, 0, "formula path")));
  FormulaStats st = stats(f);
  SignatureReport rep = validate_signature(f);
  out << "signature " << tag_to_string(f) << "\n";
  out << "variables " << st.n_vars << ", constraints " << st.n_constraints << ", encoding " << st.encoding_length
      << "\n";
  for (const auto& [k, n] : st.per_kind) out << "  " << k << " " << n << "\n";
  for (const auto& v : rep.violations)
    out << "violation" << (v.constraint ? " at constraint " + std::to_string(*v.constraint) : std::string()) << ": "
        << v.reason << "\n";
  out << (rep.ok() ? "ok" : "invalid") << "\n";
  return rep.ok() ? 0 : 1;
}

int cmd_reduce(const RunConfig& c, std::ostream& out) {
  const std::string path = input(c, 0, "formula path");
  Formula cur = parse_formula(read_file(path));
  if (c.passes.empty()) throw UsageError("reduce needs --pass or --pipeline");
  check_chain(c.passes, cur.tag().kind, c.G.has_value());
  std::vector<ReductionOutput> stages;
  for (const auto& p : c.passes) {
    auto produced = run_pass(p, cur, c);
    for (auto& s : produced) stages.push_back(std::move(s));
    cur = stages.back().target;
  }
  std::string prov;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    prov += stages[i].provenance.to_text();
    if (c.keep_stages) {
      const std::string stem = "stage-" + std::to_string(i) + "-" + stages[i].provenance.pass;
      write_file(out_dir(c) / (stem + ".ccsp"), serialize(stages[i].target));
      write_file(out_dir(c) / (stem + ".prov"), stages[i].provenance.to_text());
    }
  }
  const std::string text = serialize(cur);
  fs::path sidecar;
  if (c.output) {
    write_file(*c.output, text);
    sidecar = *c.output + ".prov";
  } else {
    out << text;
    sidecar = out_dir(c) / (fs::path(path).stem().string() + "." + c.passes.back() + ".prov");
  }
  write_file(sidecar, prov);
  return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  Formula f = parse_formula(read_file(input(c, 0, "formula path")));
  Assignment a = parse_assignment(f, read_file(input(c, 1, "assignment path")));
  ViolationReport r = c.relaxed ? check_relaxed(f, a, parse_rational(*c.relaxed)) : check_exact(f, a);
  out << r.to_text(f);
  return r.ok() ? 0 : 1;
}

int cmd_equisat(const RunConfig& c, std::ostream& out) {
  Formula f = parse_formula(read_file(input(c, 0, "formula path")));
  if (c.passes.size() != 1 || c.passes[0] == "full") throw UsageError("equisat needs exactly one --pass");
  check_chain(c.passes, f.tag().kind, c.G.has_value());
  ReductionOutput r = run_pass(c.passes[0], f, c).front();
  HarnessOptions opt;
  opt.grid.resolution = c.resolution;
  opt.grid.budget = c.budget;
  opt.grid.max_free_vars = c.max_free_vars;
  HarnessReport rep = equisat_harness(f, r, opt);
  out << rep.to_text();
  return rep.ok() ? 0 : 1;
}

int cmd_curvature(const RunConfig& c, std::ostream& out) {
  if (!c.poly2) throw UsageError("curvature needs --poly2");
  Poly2 F = Poly2::parse(*c.poly2);
  out << "F = " << F.to_string() << "\n";
  WellBehavedReport wb = check_well_behaved(F);
  if (!wb.ok()) {
    for (const auto& s : wb.failures()) out << "not well-behaved: " << s << "\n";
    return 1;
  }
  CurvatureReport cr = classify_curvature(F);
  out << "fx " << to_string(cr.jet.fx()) << ", fy " << to_string(cr.jet.fy()) << ", fxx " << to_string(cr.jet.fxx())
      << ", fxy " << to_string(cr.jet.fxy()) << ", fyy " << to_string(cr.jet.fyy()) << "\n";
  out << "kappa' = " << to_string(cr.kappa_prime) << "\n";
  out << "classification " << curvature_name(cr.classification) << "\n";
  if (cr.jet.fy() != 0) {
    ExplJet j = expl_jet(F);
    out << "y'(0) = " << to_string(j.d1) << ", y''(0) = " << to_string(j.d2) << "\n";
  }
  return 0;
}

int cmd_wiring(const RunConfig& c, std::ostream& out) {
  Formula f = parse_formula(read_file(input(c, 0, "formula path")));
  WiringDiagram d = build_diagram(f);
  DiagramReport rep = validate_diagram(d, f);
  RenderFormat fmt;
  if (c.format == "structured") fmt = RenderFormat::Structured;
  else if (c.format == "svg") fmt = RenderFormat::Svg;
  else throw UsageError("--format is structured or svg");
  std::string doc = render(d, f, fmt);
  const std::string gadgets = c.gadgets ? gadget_sequence(d).to_text(f) : std::string();
  // The gadget list follows a structured document; next to an SVG it goes to stdout.
  if (fmt == RenderFormat::Structured) doc += gadgets;
  if (c.output) write_file(*c.output, doc);
  else out << doc;
  if (fmt == RenderFormat::Svg) out << gadgets;
  if (!rep.ok()) out << rep.to_text();
  return rep.ok() ? 0 : 1;
}

int cmd_pack_verify(const RunConfig& c, std::ostream& out) {
  PackingInstance inst = parse_instance(read_file(input(c, 0, "instance path")));
  std::vector<RigidMotion> m = parse_placement(read_file(input(c, 1, "placement path")));
  PlacementReport rep = verify_placement(inst, m);
  out << rep.to_text();
  if (c.svg) write_file(*c.svg, render_placement_svg(inst, m));
  return rep.ok() ? 0 : 1;
}

int cmd_identity(const RunConfig& c, std::ostream& out) {
  AppendixReport r = verify_appendix_identity(c.samples, c.seed);
  out << "samples " << r.samples << ", predicate true " << r.predicate_true << ", irrational roots "
      << r.irrational_roots << ", counterexamples " << r.counterexamples.size() << "\n";
  for (const auto& [x, y] : r.counterexamples) out << "counterexample x = " << to_string(x) << ", y = " << to_string(y) << "\n";
  return r.ok() ? 0 : 1;
}

}  // namespace

const std::vector<std::string>& pass_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : pass_table()) n.push_back(k);
    return n;
  }();
  return names;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, int (*)(const RunConfig&, std::ostream&)> commands = {
      {"validate", cmd_validate}, {"reduce", cmd_reduce},         {"verify", cmd_verify},
      {"equisat", cmd_equisat},   {"curvature", cmd_curvature},   {"wiring", cmd_wiring},
      {"pack-verify", cmd_pack_verify}, {"identity-check", cmd_identity},
  };
  auto it = commands.find(c.command);
  if (it == commands.end()) {
    err << "error: unknown command '" << c.command << "'\n";
    return 2;
  }
  try {
    return it->second(c, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    // what() already starts with the error kind.
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error (Io): " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ccsp
