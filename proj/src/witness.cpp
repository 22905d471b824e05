#include "ccsp/witness.hpp"

#include "ccsp/error.hpp"

#include <algorithm>
#include <sstream>

namespace ccsp {

const Rational& Assignment::at(Var v) const {
  if (!has(v)) throw Error(Errc::MissingVariable, "no value for variable #" + std::to_string(v.index));
  return *v_[v.index];
}

bool Assignment::complete() const {
  return std::all_of(v_.begin(), v_.end(), [](const auto& x) { return x.has_value(); });
}

Assignment parse_assignment(const Formula& f, std::string_view text) {
  Assignment a(f.num_vars());
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw ParseError(Errc::Syntax, "expected 'name = value'", lineno, 1);
    std::string name = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto v = f.find(name);
    if (!v) throw ParseError(Errc::UndeclaredVariable, "unknown variable '" + name + "'", lineno, 1);
    auto q = try_parse_rational(value);
    if (!q) throw ParseError(Errc::Syntax, "malformed rational '" + value + "'", lineno, static_cast<int>(eq) + 2);
    a.set(*v, *q);
  }
  return a;
}

std::string serialize_assignment(const Formula& f, const Assignment& a) {
  std::string out;
  for (std::uint32_t i = 0; i < f.num_vars(); ++i)
    if (a.has(Var{i})) out += f.name(Var{i}) + " = " + to_string(a.at(Var{i})) + "\n";
  return out;
}

std::string Guarantee::to_string() const {
  if (kind == GuaranteeKind::Exact) return "Exact";
  return "RelaxedApproxSquare(" + (eps ? ccsp::to_string(*eps) : std::string("?")) + ")";
}

Assignment WitnessMap::forward(const Assignment& src) const {
  if (forward_unavailable) throw Error(Errc::NotEvaluable, *forward_unavailable);
  Assignment tgt(forward_evals.size());
  for (std::uint32_t i = 0; i < forward_evals.size(); ++i) tgt.set(Var{i}, forward_evals[i](src, tgt));
  return tgt;
}

std::optional<std::string> Provenance::lookup(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  return std::nullopt;
}

std::string Provenance::to_text() const {
  std::ostringstream o;
  auto line = [&](const char* label, const FormulaStats& s) {
    o << label << " vars " << s.n_vars << " constraints " << s.n_constraints << " encoding " << s.encoding_length
      << "\n";
  };
  o << "pass " << pass << "\n";
  line("source", source);
  line("target", target);
  for (const auto& [k, v] : params) o << "param " << k << " " << v << "\n";
  for (const auto& w : warnings) o << "warning " << w << "\n";
  return o.str();
}

}  // namespace ccsp
