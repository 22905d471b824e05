#pragma once

#include "ccsp/formula.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccsp {

/// Parses the line-oriented formula text format. Throws ParseError with line/col.
Formula parse_formula(std::string_view text);

/// Deterministic canonical text; parse_formula(serialize(f)) == f.
std::string serialize(const Formula& f);

std::string tag_to_string(const Formula& f);

struct FormulaStats {
  std::size_t n_vars = 0;
  std::size_t n_constraints = 0;
  std::map<std::string, std::size_t> per_kind;
  /// Symbol count of the variable and constraint statements of the canonical text.
  std::size_t encoding_length = 0;
};

FormulaStats stats(const Formula& f);

struct SignatureViolation {
  /// Index into constraints(), or empty for tag-level problems.
  std::optional<std::size_t> constraint;
  std::string reason;
};

struct SignatureReport {
  std::vector<SignatureViolation> violations;
  bool ok() const { return violations.empty(); }
};

SignatureReport validate_signature(const Formula& f);

/// Renders one constraint as its text statement.
std::string constraint_text(const Formula& f, const Constraint& c);

}  // namespace ccsp
