#include "ccsp/formula.hpp"

#include "ccsp/error.hpp"

#include <cctype>
#include <type_traits>

namespace ccsp {

EpsToken EpsToken::explicit_value(const Rational& eps) {
  if (eps <= 0) throw Error(Errc::InvalidArgument, "epsilon must be positive");
  EpsToken t;
  t.kind = Kind::Explicit;
  t.value = eps;
  return t;
}

EpsToken EpsToken::power_tower(std::uint64_t m) {
  EpsToken t;
  t.kind = Kind::PowerTower;
  t.tower = m;
  return t;
}

std::optional<Rational> EpsToken::evaluate() const {
  if (kind == Kind::Explicit) return value;
  // 2^(-2^M) has 2^M bits in the denominator; stop before that gets silly.
  if (tower > 16) return std::nullopt;
  Integer den = 1;
  den <<= (1UL << tower);
  return Rational(Integer(1), den);
}

std::string EpsToken::to_string() const {
  if (kind == Kind::Explicit) return ccsp::to_string(value);
  return "2^-2^" + std::to_string(tower);
}

EpsToken EpsToken::parse(std::string_view text) {
  constexpr std::string_view prefix = "2^-2^";
  if (text.substr(0, prefix.size()) == prefix) {
    std::string digits(text.substr(prefix.size()));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw Error(Errc::Syntax, "malformed power tower '" + std::string(text) + "'");
    return power_tower(std::stoull(digits));
  }
  return explicit_value(parse_rational(text));
}

const char* keyword(const Constraint& c) {
  static const char* const names[] = {"add",      "mul",      "square",   "nonneg", "eqc",   "expl-eq",
                                      "expl-geq", "expl-leq", "impl-eq", "impl-geq", "range", "asq"};
  return names[c.index()];
}

std::vector<Var> variables_of(const Constraint& c) {
  return std::visit(
      [](const auto& k) -> std::vector<Var> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cons::Add> || std::is_same_v<T, cons::Mul>)
          return {k.x, k.y, k.z};
        else if constexpr (std::is_same_v<T, cons::Nonneg> || std::is_same_v<T, cons::EqConst> ||
                           std::is_same_v<T, cons::RangeBound>)
          return {k.x};
        else
          return {k.x, k.y};
      },
      c);
}

std::optional<FnId> function_of(const Constraint& c) {
  return std::visit(
      [](const auto& k) -> std::optional<FnId> {
        if constexpr (requires { k.f; })
          return k.f;
        else
          return std::nullopt;
      },
      c);
}

const char* signature_name(SignatureKind k) {
  switch (k) {
    case SignatureKind::AmiHalf: return "AMI_HALF";
    case SignatureKind::Square1: return "SQUARE1";
    case SignatureKind::CeExpl: return "CE_EXPL";
    case SignatureKind::CciExpl: return "CCI_EXPL";
    case SignatureKind::Ce: return "CE";
    case SignatureKind::Cci: return "CCI";
    case SignatureKind::Square1Relaxed: return "SQUARE1_RELAXED";
  }
  return "?";
}

std::optional<Var> Formula::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return Var{it->second};
}

std::optional<FnId> Formula::find_function(std::string_view name) const {
  for (std::uint32_t i = 0; i < functions_.size(); ++i)
    if (functions_[i].name == name) return FnId{i};
  return std::nullopt;
}

UnivariateFn Formula::univariate(FnId id) const {
  const auto& body = function(id).body;
  if (const auto* p = std::get_if<Poly1>(&body)) return *p;
  if (const auto* b = std::get_if<BranchFn>(&body)) return *b;
  throw Error(Errc::SignatureError, "function '" + function(id).name + "' is bivariate");
}

const Poly2& Formula::bivariate(FnId id) const {
  const auto* p = std::get_if<Poly2>(&function(id).body);
  if (!p) throw Error(Errc::SignatureError, "function '" + function(id).name + "' is not bivariate");
  return *p;
}

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == ';' || c == '"') return false;
  return true;
}

}  // namespace

FormulaBuilder& FormulaBuilder::set_tag(const SignatureTag& tag) {
  for (auto id : {tag.f, tag.g})
    if (id && id->index >= f_.functions_.size()) throw Error(Errc::UnknownFunction, "tag references unknown function");
  f_.tag_ = tag;
  return *this;
}

FormulaBuilder& FormulaBuilder::set_delta(const Rational& delta) {
  if (delta <= 0) throw Error(Errc::InvalidArgument, "delta must be positive");
  f_.delta_ = delta;
  return *this;
}

FnId FormulaBuilder::add_function(const std::string& name, FunctionBody body) {
  if (!valid_name(name)) throw Error(Errc::Syntax, "invalid function name '" + name + "'");
  if (f_.find_function(name)) throw Error(Errc::DuplicateName, "function '" + name + "' already defined");
  f_.functions_.push_back({name, std::move(body)});
  return FnId{static_cast<std::uint32_t>(f_.functions_.size() - 1)};
}

FnId FormulaBuilder::intern_function(const std::string& name, const FunctionBody& body) {
  if (auto id = f_.find_function(name)) {
    if (f_.functions_[id->index].body == body) return *id;
    std::string alt = name;
    for (int k = 2; f_.find_function(alt); ++k) alt = name + "_" + std::to_string(k);
    return add_function(alt, body);
  }
  return add_function(name, body);
}

Var FormulaBuilder::add_var(const std::string& name) {
  if (!valid_name(name)) throw Error(Errc::Syntax, "invalid variable name '" + name + "'");
  auto idx = static_cast<std::uint32_t>(f_.names_.size());
  if (!f_.index_.emplace(name, idx).second) throw Error(Errc::DuplicateName, "variable '" + name + "' already declared");
  f_.names_.push_back(name);
  return Var{idx};
}

Var FormulaBuilder::add_fresh_var(const std::string& base) {
  if (!f_.find(base)) return add_var(base);
  for (int k = 2;; ++k) {
    std::string candidate = base + "'" + std::to_string(k);
    if (!f_.find(candidate)) return add_var(candidate);
  }
}

void FormulaBuilder::add(Constraint c) {
  for (Var v : variables_of(c))
    if (v.index >= f_.names_.size()) throw Error(Errc::UndeclaredVariable, "constraint references unknown variable");
  if (auto fn = function_of(c); fn && fn->index >= f_.functions_.size())
    throw Error(Errc::UnknownFunction, "constraint references unknown function");
  if (auto* r = std::get_if<cons::RangeBound>(&c); r && r->lo > r->hi)
    throw Error(Errc::InvalidArgument, "empty range bound");
  f_.constraints_.push_back(std::move(c));
}

}  // namespace ccsp
