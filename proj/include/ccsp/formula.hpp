#pragma once

#include "ccsp/funclib.hpp"
#include "ccsp/poly.hpp"
#include "ccsp/rational.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ccsp {

struct Var {
  std::uint32_t index = 0;
  auto operator<=>(const Var&) const = default;
};

struct FnId {
  std::uint32_t index = 0;
  auto operator<=>(const FnId&) const = default;
};

/// Either an explicit positive rational or the symbolic 2^(-2^M).
struct EpsToken {
  enum class Kind { Explicit, PowerTower };
  Kind kind = Kind::Explicit;
  Rational value = 0;
  std::uint64_t tower = 0;

  static EpsToken explicit_value(const Rational& eps);
  static EpsToken power_tower(std::uint64_t m);

  /// The rational value when explicit, or when the tower is small enough to expand.
  std::optional<Rational> evaluate() const;
  std::string to_string() const;
  static EpsToken parse(std::string_view text);

  friend bool operator==(const EpsToken& a, const EpsToken& b) {
    return a.kind == b.kind && (a.kind == Kind::Explicit ? a.value == b.value : a.tower == b.tower);
  }
};

namespace cons {
struct Add { Var x, y, z; friend bool operator==(const Add&, const Add&) = default; };
struct Mul { Var x, y, z; friend bool operator==(const Mul&, const Mul&) = default; };
struct Square { Var x, y; friend bool operator==(const Square&, const Square&) = default; };
struct Nonneg { Var x; friend bool operator==(const Nonneg&, const Nonneg&) = default; };
struct EqConst { Var x; Rational value; friend bool operator==(const EqConst&, const EqConst&) = default; };
struct ExplicitEq { Var x, y; FnId f; friend bool operator==(const ExplicitEq&, const ExplicitEq&) = default; };
struct ExplicitGeq { Var x, y; FnId f; friend bool operator==(const ExplicitGeq&, const ExplicitGeq&) = default; };
struct ExplicitLeq { Var x, y; FnId f; friend bool operator==(const ExplicitLeq&, const ExplicitLeq&) = default; };
struct ImplicitEq { Var x, y; FnId f; friend bool operator==(const ImplicitEq&, const ImplicitEq&) = default; };
struct ImplicitGeq { Var x, y; FnId f; friend bool operator==(const ImplicitGeq&, const ImplicitGeq&) = default; };
struct RangeBound { Var x; Rational lo, hi; friend bool operator==(const RangeBound&, const RangeBound&) = default; };
struct ApproxSquare { Var x, y; EpsToken eps; friend bool operator==(const ApproxSquare&, const ApproxSquare&) = default; };
}  // namespace cons

using Constraint = std::variant<cons::Add, cons::Mul, cons::Square, cons::Nonneg, cons::EqConst, cons::ExplicitEq,
                                cons::ExplicitGeq, cons::ExplicitLeq, cons::ImplicitEq, cons::ImplicitGeq,
                                cons::RangeBound, cons::ApproxSquare>;

/// Text keyword of a constraint variant ("add", "mul", ...).
const char* keyword(const Constraint& c);
std::vector<Var> variables_of(const Constraint& c);
std::optional<FnId> function_of(const Constraint& c);

enum class SignatureKind { AmiHalf, Square1, CeExpl, CciExpl, Ce, Cci, Square1Relaxed };

struct SignatureTag {
  SignatureKind kind = SignatureKind::AmiHalf;
  std::optional<FnId> f;
  std::optional<FnId> g;
  std::optional<EpsToken> eps;

  friend bool operator==(const SignatureTag&, const SignatureTag&) = default;
};

const char* signature_name(SignatureKind k);

using FunctionBody = std::variant<Poly1, Poly2, BranchFn>;

struct FunctionDef {
  std::string name;
  FunctionBody body;
  friend bool operator==(const FunctionDef&, const FunctionDef&) = default;
};

/// Immutable constraint formula. Build with FormulaBuilder.
class Formula {
 public:
  std::size_t num_vars() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(Var v) const { return names_.at(v.index); }
  std::optional<Var> find(std::string_view name) const;

  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<FunctionDef>& functions() const { return functions_; }
  const FunctionDef& function(FnId id) const { return functions_.at(id.index); }
  std::optional<FnId> find_function(std::string_view name) const;
  /// Univariate view of a Poly1 or branch function; SignatureError for bivariate ones.
  UnivariateFn univariate(FnId id) const;
  const Poly2& bivariate(FnId id) const;

  const SignatureTag& tag() const { return tag_; }
  const Rational& delta() const { return delta_; }

  friend bool operator==(const Formula&, const Formula&) = default;

 private:
  friend class FormulaBuilder;
  SignatureTag tag_;
  Rational delta_ = Rational(1, 2);
  std::vector<FunctionDef> functions_;
  std::vector<std::string> names_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
  std::vector<Constraint> constraints_;
};

class FormulaBuilder {
 public:
  FormulaBuilder() = default;
  /// Starts from a copy of an existing formula.
  explicit FormulaBuilder(const Formula& base) : f_(base) {}

  FormulaBuilder& set_tag(const SignatureTag& tag);
  FormulaBuilder& set_delta(const Rational& delta);
  FnId add_function(const std::string& name, FunctionBody body);
  /// Returns an existing function with the same name and body, or adds one.
  FnId intern_function(const std::string& name, const FunctionBody& body);
  Var add_var(const std::string& name);
  /// Adds a variable, suffixing the name if it is already taken.
  Var add_fresh_var(const std::string& base);
  void add(Constraint c);

  std::size_t num_vars() const { return f_.names_.size(); }
  const Formula& peek() const { return f_; }
  Formula build() const { return f_; }

 private:
  Formula f_;
};

}  // namespace ccsp
