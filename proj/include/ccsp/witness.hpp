#pragma once

#include "ccsp/formula.hpp"
#include "ccsp/formula_io.hpp"
#include "ccsp/rational.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ccsp {

/// Partial map from the variables of one formula to rationals.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t n) : v_(n) {}

  std::size_t size() const { return v_.size(); }
  bool has(Var v) const { return v.index < v_.size() && v_[v.index].has_value(); }
  /// Throws MissingVariable when unset.
  const Rational& at(Var v) const;
  const std::optional<Rational>& get(Var v) const { return v_.at(v.index); }
  void set(Var v, Rational value) { v_.at(v.index) = std::move(value); }
  void clear(Var v) { v_.at(v.index).reset(); }
  bool complete() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<std::optional<Rational>> v_;
};

/// Reads "name = p/q" lines (# comments allowed).
Assignment parse_assignment(const Formula& f, std::string_view text);
std::string serialize_assignment(const Formula& f, const Assignment& a);

enum class GuaranteeKind { Exact, RelaxedApproxSquare };

struct Guarantee {
  GuaranteeKind kind = GuaranteeKind::Exact;
  /// The relaxation parameter, for RelaxedApproxSquare.
  std::optional<Rational> eps;

  static Guarantee exact() { return {}; }
  static Guarantee relaxed(const Rational& e) { return {GuaranteeKind::RelaxedApproxSquare, e}; }
  std::string to_string() const;
};

using ForwardEval = std::function<Rational(const Assignment& src, const Assignment& tgt)>;

struct WitnessMap {
  /// One evaluator per target variable, applied in variable order.
  std::vector<ForwardEval> forward_evals;
  std::optional<std::string> forward_unavailable;
  std::function<std::pair<Assignment, Guarantee>(const Assignment&)> backward_fn;

  bool forward_available() const { return !forward_unavailable.has_value(); }
  Assignment forward(const Assignment& src) const;
  std::pair<Assignment, Guarantee> backward(const Assignment& tgt) const { return backward_fn(tgt); }
};

struct Provenance {
  std::string pass;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> warnings;
  FormulaStats source;
  FormulaStats target;

  void param(const std::string& key, const std::string& value) { params.emplace_back(key, value); }
  std::optional<std::string> lookup(const std::string& key) const;
  std::string to_text() const;
};

struct ReductionOutput {
  Formula target;
  WitnessMap witness;
  Provenance provenance;
  /// Named target variables of interest (e.g. "eps", "2eps3").
  std::map<std::string, Var> landmarks;
};

}  // namespace ccsp
