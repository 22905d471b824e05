#include "ccsp/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  ccsp::RunConfig cfg;
  CLI::App app{"Reduction compiler and verifier for continuous constraint satisfaction problems"};
  app.require_subcommand(1);
  std::string pipeline;
  unsigned test_L = 0;

  auto common_out = [&](CLI::App* sub) {
    sub->add_option("-o,--output", cfg.output, "Output file (default: stdout)");
  };

  auto* validate = app.add_subcommand("validate", "Parse a formula and check its signature");
  validate->add_option("formula", cfg.inputs, "Formula file")->required();

  auto* reduce = app.add_subcommand("reduce", "Apply reduction passes");
  reduce->add_option("formula", cfg.inputs, "Formula file")->required();
  reduce->add_option("--pass", cfg.passes, "Pass name, repeatable")->take_all();
  reduce->add_option("--pipeline", pipeline, "Comma-separated pass list");
  common_out(reduce);
  reduce->add_option("--out-dir", cfg.out_dir, "Directory for sidecars (default: $CCSP_OUT_DIR or .)");
  reduce->add_flag("--keep-stages", cfg.keep_stages, "Write every intermediate formula");

  auto* verify = app.add_subcommand("verify", "Check an assignment against a formula");
  verify->add_option("files", cfg.inputs, "Formula file and assignment file")->required()->expected(2);
  verify->add_option("--relaxed", cfg.relaxed, "Check the eps-relaxation instead");

  auto* equisat = app.add_subcommand("equisat", "Run one pass and test both witness maps");
  equisat->add_option("formula", cfg.inputs, "Formula file")->required();
  equisat->add_option("--pass", cfg.passes, "Pass name")->required();
  equisat->add_option("--resolution", cfg.resolution, "Grid points per free variable (default 8)")
      ->check(CLI::PositiveNumber);
  equisat->add_option("--budget", cfg.budget, "Grid search node budget (default 200000)")->check(CLI::PositiveNumber);
  equisat->add_option("--max-free-vars", cfg.max_free_vars, "Free variable limit for grid search (default 6)")
      ->check(CLI::PositiveNumber);

  for (auto* sub : {reduce, equisat}) {
    sub->add_option("--f", cfg.f, "Univariate f for explicit passes");
    sub->add_option("--g", cfg.g, "Univariate g for explicit passes");
    sub->add_option("--F", cfg.F, "Bivariate F for implicit passes");
    sub->add_option("--G", cfg.G, "Bivariate G for implicit passes");
    sub->add_option("--orient-F", cfg.orient_F, "Orientation of F for signflip: letters s (swap), f (flip)");
    sub->add_option("--orient-G", cfg.orient_G, "Orientation of G for signflip");
    sub->add_option("--delta", cfg.delta, "Promise radius (default 1/8)");
    sub->add_option("--test-L", test_L, "Short test-mode chain length (default: sound mode)");
  }

  auto* curvature = app.add_subcommand("curvature", "Classify a bivariate polynomial at the origin");
  curvature->add_option("--poly2", cfg.poly2, "Polynomial in x and y")->required();

  auto* wiring = app.add_subcommand("wiring", "Build, validate and render the wiring diagram of a CCI formula");
  wiring->add_option("formula", cfg.inputs, "Formula file")->required();
  wiring->add_option("--format", cfg.format, "structured or svg (default structured)");
  wiring->add_flag("--gadgets", cfg.gadgets, "Also print the gadget sequence");
  common_out(wiring);

  auto* pack = app.add_subcommand("pack-verify", "Verify a placement of convex pieces");
  pack->add_option("files", cfg.inputs, "Instance file and placement file")->required()->expected(2);
  pack->add_option("--svg", cfg.svg, "Write an SVG of the placement");

  auto* ident = app.add_subcommand("identity-check", "Sample the circle-constraint identity");
  ident->add_option("--samples", cfg.samples, "Number of samples (default 10000)")->check(CLI::PositiveNumber);
  ident->add_option("--seed", cfg.seed, "Random seed (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; everything else is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  for (auto& p : split_commas(pipeline)) cfg.passes.push_back(p);
  if (test_L > 0) cfg.test_L = test_L;
  return ccsp::run(cfg, std::cout, std::cerr);
}
