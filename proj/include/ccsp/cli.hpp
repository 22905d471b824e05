#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ccsp {

struct RunConfig {
  std::string command;
  /// Positional inputs: formula, assignment, instance or placement paths.
  std::vector<std::string> inputs;
  std::optional<std::string> output;
  /// Directory for sidecars and stage files; falls back to $CCSP_OUT_DIR, then ".".
  std::optional<std::string> out_dir;
  bool keep_stages = false;

  std::vector<std::string> passes;
  std::optional<std::string> f, g, F, G;
  std::string orient_F, orient_G;
  std::string delta = "1/8";
  std::optional<unsigned> test_L;

  std::optional<std::string> relaxed;
  std::optional<std::string> poly2;
  std::string format = "structured";
  bool gadgets = false;
  std::optional<std::string> svg;

  std::size_t resolution = 8;
  std::size_t budget = 200000;
  std::size_t max_free_vars = 6;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
};

/// Runs one subcommand. Returns 0 iff every emitted report is violation-free; 2 on usage,
/// parse or I/O errors.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// The names accepted by `reduce --pass`.
const std::vector<std::string>& pass_names();

}  // namespace ccsp
