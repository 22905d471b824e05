#pragma once

#include "ccsp/formula.hpp"
#include "ccsp/witness.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ccsp {

enum class Status { Satisfied, Violated, NotApplicable };

const char* status_name(Status s);

struct ConstraintResult {
  Status status = Status::Satisfied;
  /// Exact defect when violated; slack (0 for equalities) when satisfied.
  Rational margin = 0;
};

struct ViolationReport {
  std::vector<ConstraintResult> per_constraint;
  /// Relaxed checks only: variables outside [-1, 1].
  std::vector<Var> range_violations;
  /// Variables outside [-delta, delta]; informational.
  std::vector<Var> promise_violations;
  Rational worst_margin = 0;

  bool ok() const;
  bool promise_ok() const { return promise_violations.empty(); }
  std::size_t violated_count() const;
  std::string to_text(const Formula& f) const;
};

ViolationReport check_exact(const Formula& f, const Assignment& a);
/// Squares become |y - x^2| <= eps and every variable must lie in [-1, 1].
ViolationReport check_relaxed(const Formula& f, const Assignment& a, const Rational& eps);
ViolationReport check_with(const Formula& f, const Assignment& a, const Guarantee& g);

struct ApproxLemmaResult {
  std::uint64_t M = 0;
  /// Complexity bound used for the relaxed formula.
  std::uint64_t complexity = 0;
  std::size_t squares = 0;
};

/// Smallest M with r * 2^(-2^(M+1)) < 2^(-2^(L+5)) (M = 0 without squares).
ApproxLemmaResult lemma_approx_M(const Formula& f);

struct SearchOptions {
  std::size_t resolution = 8;
  std::size_t budget = 200000;
  std::size_t max_free_vars = 6;
  std::optional<Rational> relax_eps;
};

struct PruneOptions {
  std::size_t max_boxes = 50000;
  int max_depth = 24;
  std::size_t max_vars = 8;
  std::optional<Rational> relax_eps;
};

enum class SearchKind { FoundWitness, Exhausted, CertifiedEmpty };

const char* search_kind_name(SearchKind k);

struct SearchResult {
  SearchKind kind = SearchKind::Exhausted;
  std::optional<Assignment> witness;
  std::optional<Assignment> best;
  std::optional<Rational> best_margin;
  std::size_t nodes = 0;
};

/// Grid enumeration with equality propagation. BudgetExceeded when too many free variables
/// remain or the node budget would be exceeded.
SearchResult grid_search(const Formula& f, const SearchOptions& opt = {});

/// Interval branch-and-prune over [-delta, delta]^n; CertifiedEmpty is sound for the exact
/// semantics (or for the relaxed one when relax_eps is set).
SearchResult branch_and_prune(const Formula& f, const PruneOptions& opt = {});

/// Fills in values forced by EqConst, Add, Square, Mul and polynomial ExplicitEq constraints.
void propagate(const Formula& f, Assignment& a);

struct DirectionReport {
  std::string search;
  bool witness_found = false;
  bool checked = false;
  bool passed = true;
  std::string detail;
};

struct HarnessOptions {
  SearchOptions grid;
  PruneOptions prune;
};

struct HarnessReport {
  DirectionReport forward;
  DirectionReport backward;
  std::optional<SearchKind> source_prune;
  std::optional<SearchKind> target_prune;
  bool ok() const { return forward.passed && backward.passed; }
  std::string to_text() const;
};

HarnessReport equisat_harness(const Formula& source, const ReductionOutput& r, const HarnessOptions& opt = {});

}  // namespace ccsp
