#include "ccsp/formula_io.hpp"

#include "ccsp/error.hpp"

#include <cctype>
#include <sstream>

namespace ccsp {

namespace {

struct Token {
  std::string text;
  bool quoted = false;
  int line = 0;
  int col = 0;
};

using Statement = std::vector<Token>;

std::vector<Statement> tokenize(std::string_view src) {
  std::vector<Statement> out;
  Statement cur;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  auto advance = [&] {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n' || c == ';') {
      flush();
      advance();
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
    } else if (c == '"') {
      Token t{"", true, line, col};
      advance();
      while (i < src.size() && src[i] != '"') {
        if (src[i] == '\n') throw ParseError(Errc::Syntax, "unterminated string", t.line, t.col);
        t.text += src[i];
        advance();
      }
      if (i >= src.size()) throw ParseError(Errc::Syntax, "unterminated string", t.line, t.col);
      advance();
      cur.push_back(std::move(t));
    } else {
      Token t{"", false, line, col};
      while (i < src.size() && !std::isspace(static_cast<unsigned char>(src[i])) && src[i] != ';' && src[i] != '#' &&
             src[i] != '"') {
        t.text += src[i];
        advance();
      }
      cur.push_back(std::move(t));
    }
  }
  flush();
  return out;
}

struct PendingTag {
  SignatureKind kind = SignatureKind::AmiHalf;
  std::vector<std::string> args;
  Token where;
};

PendingTag parse_tag(const Token& t) {
  PendingTag p;
  p.where = t;
  std::string s = t.text;
  std::string head = s, inner;
  auto open = s.find('(');
  if (open != std::string::npos) {
    if (s.back() != ')') throw ParseError(Errc::Syntax, "malformed signature tag '" + s + "'", t.line, t.col);
    head = s.substr(0, open);
    inner = s.substr(open + 1, s.size() - open - 2);
    std::stringstream ss(inner);
    std::string part;
    while (std::getline(ss, part, ',')) p.args.push_back(part);
  }
  struct Entry {
    const char* name;
    SignatureKind kind;
    std::size_t arity;
  };
  static const Entry table[] = {
      {"AMI_HALF", SignatureKind::AmiHalf, 0}, {"SQUARE1", SignatureKind::Square1, 0},
      {"CE_EXPL", SignatureKind::CeExpl, 1},   {"CCI_EXPL", SignatureKind::CciExpl, 2},
      {"CE", SignatureKind::Ce, 1},            {"CCI", SignatureKind::Cci, 2},
      {"SQUARE1_RELAXED", SignatureKind::Square1Relaxed, 1},
  };
  for (const auto& e : table) {
    if (head == e.name) {
      if (p.args.size() != e.arity)
        throw ParseError(Errc::Arity, "signature " + head + " takes " + std::to_string(e.arity) + " argument(s)",
                         t.line, t.col);
      p.kind = e.kind;
      return p;
    }
  }
  throw ParseError(Errc::UnknownKeyword, "unknown signature '" + head + "'", t.line, t.col);
}

Rational rational_token(const Token& t) {
  auto q = try_parse_rational(t.text);
  if (!q) throw ParseError(Errc::Syntax, "malformed rational '" + t.text + "'", t.line, t.col);
  return *q;
}

}  // namespace

Formula parse_formula(std::string_view text) {
  FormulaBuilder b;
  std::optional<PendingTag> tag;
  Rational delta(1, 2);
  bool seen_header = false;

  for (const Statement& st : tokenize(text)) {
    const Token& kw = st[0];
    auto need = [&](std::size_t n) {
      if (st.size() != n + 1)
        throw ParseError(Errc::Arity,
                         "'" + kw.text + "' takes " + std::to_string(n) + " argument(s), got " +
                             std::to_string(st.size() - 1),
                         kw.line, kw.col);
    };
    auto var = [&](std::size_t i) {
      auto v = b.peek().find(st[i].text);
      if (!v) throw ParseError(Errc::UndeclaredVariable, "undeclared variable '" + st[i].text + "'", st[i].line, st[i].col);
      return *v;
    };
    auto fn = [&](std::size_t i, bool bivariate) {
      auto id = b.peek().find_function(st[i].text);
      if (!id) throw ParseError(Errc::UnknownFunction, "unknown function '" + st[i].text + "'", st[i].line, st[i].col);
      bool is_bi = std::holds_alternative<Poly2>(b.peek().function(*id).body);
      if (is_bi != bivariate)
        throw ParseError(Errc::SignatureError,
                         "function '" + st[i].text + (bivariate ? "' is not bivariate" : "' is not univariate"),
                         st[i].line, st[i].col);
      return *id;
    };
    const std::string& k = kw.text;
    try {
      if (k == "signature") {
        if (seen_header) throw ParseError(Errc::Syntax, "duplicate signature header", kw.line, kw.col);
        if (st.size() != 2 && st.size() != 4) need(3);
        tag = parse_tag(st[1]);
        if (st.size() == 4) {
          if (st[2].text != "delta")
            throw ParseError(Errc::Syntax, "expected 'delta'", st[2].line, st[2].col);
          delta = rational_token(st[3]);
        }
        seen_header = true;
      } else if (k == "fun") {
        if (st.size() < 4) need(3);
        const std::string& kind = st[2].text;
        if (kind == "poly1" || kind == "poly2") {
          need(3);
          if (kind == "poly1")
            b.add_function(st[1].text, Poly1::parse(st[3].text));
          else
            b.add_function(st[1].text, Poly2::parse(st[3].text));
        } else if (kind == "branch") {
          need(6);
          BranchFn br{Poly2::parse(st[3].text), rational_token(st[4]), rational_token(st[5]), rational_token(st[6])};
          UnivariateFn check(br);
          b.add_function(st[1].text, br);
        } else {
          throw ParseError(Errc::UnknownKeyword, "unknown function kind '" + kind + "'", st[2].line, st[2].col);
        }
      } else if (k == "var") {
        need(1);
        b.add_var(st[1].text);
      } else if (k == "add") {
        need(3);
        b.add(cons::Add{var(1), var(2), var(3)});
      } else if (k == "mul") {
        need(3);
        b.add(cons::Mul{var(1), var(2), var(3)});
      } else if (k == "square") {
        need(2);
        b.add(cons::Square{var(1), var(2)});
      } else if (k == "nonneg") {
        need(1);
        b.add(cons::Nonneg{var(1)});
      } else if (k == "eqc") {
        need(2);
        b.add(cons::EqConst{var(1), rational_token(st[2])});
      } else if (k == "expl-eq") {
        need(3);
        b.add(cons::ExplicitEq{var(1), var(2), fn(3, false)});
      } else if (k == "expl-geq") {
        need(3);
        b.add(cons::ExplicitGeq{var(1), var(2), fn(3, false)});
      } else if (k == "expl-leq") {
        need(3);
        b.add(cons::ExplicitLeq{var(1), var(2), fn(3, false)});
      } else if (k == "impl-eq") {
        need(3);
        b.add(cons::ImplicitEq{var(1), var(2), fn(3, true)});
      } else if (k == "impl-geq") {
        need(3);
        b.add(cons::ImplicitGeq{var(1), var(2), fn(3, true)});
      } else if (k == "range") {
        need(3);
        b.add(cons::RangeBound{var(1), rational_token(st[2]), rational_token(st[3])});
      } else if (k == "asq") {
        need(3);
        b.add(cons::ApproxSquare{var(1), var(2), EpsToken::parse(st[3].text)});
      } else {
        throw ParseError(Errc::UnknownKeyword, "unknown keyword '" + k + "'", kw.line, kw.col);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.code(), e.what(), kw.line, kw.col);
    }
  }

  try {
    b.set_delta(delta);
    SignatureTag t;
    if (tag) {
      t.kind = tag->kind;
      auto resolve = [&](const std::string& name, bool bivariate) {
        auto id = b.peek().find_function(name);
        if (!id)
          throw ParseError(Errc::UnknownFunction, "signature references unknown function '" + name + "'",
                           tag->where.line, tag->where.col);
        if (std::holds_alternative<Poly2>(b.peek().function(*id).body) != bivariate)
          throw ParseError(Errc::SignatureError, "signature function '" + name + "' has the wrong arity",
                           tag->where.line, tag->where.col);
        return *id;
      };
      bool bi = t.kind == SignatureKind::Ce || t.kind == SignatureKind::Cci;
      if (t.kind == SignatureKind::Square1Relaxed) {
        t.eps = EpsToken::parse(tag->args[0]);
      } else {
        if (!tag->args.empty()) t.f = resolve(tag->args[0], bi);
        if (tag->args.size() > 1) t.g = resolve(tag->args[1], bi);
      }
    }
    b.set_tag(t);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.code(), e.what(), 1, 1);
  }
  return b.build();
}

std::string tag_to_string(const Formula& f) {
  const SignatureTag& t = f.tag();
  std::string s = signature_name(t.kind);
  if (t.kind == SignatureKind::Square1Relaxed && t.eps) return s + "(" + t.eps->to_string() + ")";
  if (t.f) {
    s += "(" + f.function(*t.f).name;
    if (t.g) s += "," + f.function(*t.g).name;
    s += ")";
  }
  return s;
}

std::string constraint_text(const Formula& f, const Constraint& c) {
  std::string s = keyword(c);
  for (Var v : variables_of(c)) s += " " + f.name(v);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cons::EqConst>)
          s += " " + to_string(k.value);
        else if constexpr (std::is_same_v<T, cons::RangeBound>)
          s += " " + to_string(k.lo) + " " + to_string(k.hi);
        else if constexpr (std::is_same_v<T, cons::ApproxSquare>)
          s += " " + k.eps.to_string();
        else if constexpr (requires { k.f; })
          s += " " + f.function(k.f).name;
      },
      c);
  return s;
}

std::string serialize(const Formula& f) {
  std::string out = "signature " + tag_to_string(f) + " delta " + to_string(f.delta()) + "\n";
  for (const auto& fn : f.functions()) {
    out += "fun " + fn.name + " ";
    if (const auto* p = std::get_if<Poly1>(&fn.body))
      out += "poly1 \"" + p->to_string() + "\"";
    else if (const auto* q = std::get_if<Poly2>(&fn.body))
      out += "poly2 \"" + q->to_string() + "\"";
    else {
      const auto& br = std::get<BranchFn>(fn.body);
      out += "branch \"" + br.curve.to_string() + "\" " + to_string(br.lin) + " " + to_string(br.quad) + " " +
             to_string(br.scale);
    }
    out += "\n";
  }
  for (const auto& n : f.names()) out += "var " + n + "\n";
  for (const auto& c : f.constraints()) out += constraint_text(f, c) + "\n";
  return out;
}

FormulaStats stats(const Formula& f) {
  FormulaStats s;
  s.n_vars = f.num_vars();
  s.n_constraints = f.constraints().size();
  s.encoding_length = 2 * f.num_vars();
  for (const auto& c : f.constraints()) {
    ++s.per_kind[keyword(c)];
    std::size_t tokens = 1 + variables_of(c).size();
    if (std::holds_alternative<cons::RangeBound>(c))
      tokens += 2;
    else if (std::holds_alternative<cons::EqConst>(c) || std::holds_alternative<cons::ApproxSquare>(c) ||
             function_of(c))
      tokens += 1;
    s.encoding_length += tokens;
  }
  return s;
}

SignatureReport validate_signature(const Formula& f) {
  SignatureReport rep;
  const SignatureTag& t = f.tag();
  auto tag_issue = [&](const std::string& why) { rep.violations.push_back({std::nullopt, why}); };
  switch (t.kind) {
    case SignatureKind::CeExpl:
    case SignatureKind::Ce:
      if (!t.f) tag_issue("tag needs a function");
      break;
    case SignatureKind::CciExpl:
    case SignatureKind::Cci:
      if (!t.f || !t.g) tag_issue("tag needs two functions");
      break;
    case SignatureKind::Square1Relaxed:
      if (!t.eps) tag_issue("tag needs an epsilon");
      break;
    default:
      break;
  }

  Rational unit = t.kind == SignatureKind::AmiHalf ? Rational(1, 2)
                  : (t.kind == SignatureKind::Square1 || t.kind == SignatureKind::Square1Relaxed) ? Rational(1)
                                                                                                   : f.delta();
  for (std::size_t i = 0; i < f.constraints().size(); ++i) {
    const Constraint& c = f.constraints()[i];
    std::string why;
    auto allowed = [&](bool ok, const std::string& reason) {
      if (!ok && why.empty()) why = reason;
    };
    const std::string kw = keyword(c);
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          const SignatureKind s = t.kind;
          if constexpr (std::is_same_v<T, cons::Add> || std::is_same_v<T, cons::Nonneg>) {
          } else if constexpr (std::is_same_v<T, cons::EqConst>) {
            allowed(k.value == unit, "constant must be " + to_string(unit) + " under " + signature_name(s));
          } else if constexpr (std::is_same_v<T, cons::Mul>) {
            allowed(s == SignatureKind::AmiHalf, kw + " not allowed under " + signature_name(s));
          } else if constexpr (std::is_same_v<T, cons::Square>) {
            allowed(s == SignatureKind::Square1, kw + " not allowed under " + signature_name(s));
          } else if constexpr (std::is_same_v<T, cons::ExplicitEq>) {
            allowed(s == SignatureKind::CeExpl && t.f && k.f == *t.f, kw + " not allowed under " + tag_to_string(f));
          } else if constexpr (std::is_same_v<T, cons::ExplicitGeq>) {
            allowed(s == SignatureKind::CciExpl && t.f && k.f == *t.f, kw + " not allowed under " + tag_to_string(f));
          } else if constexpr (std::is_same_v<T, cons::ExplicitLeq>) {
            allowed(s == SignatureKind::CciExpl && t.g && k.f == *t.g, kw + " not allowed under " + tag_to_string(f));
          } else if constexpr (std::is_same_v<T, cons::ImplicitEq>) {
            allowed(s == SignatureKind::Ce && t.f && k.f == *t.f, kw + " not allowed under " + tag_to_string(f));
          } else if constexpr (std::is_same_v<T, cons::ImplicitGeq>) {
            allowed(s == SignatureKind::Cci && ((t.f && k.f == *t.f) || (t.g && k.f == *t.g)),
                    kw + " not allowed under " + tag_to_string(f));
          } else if constexpr (std::is_same_v<T, cons::RangeBound>) {
            allowed(s == SignatureKind::Square1Relaxed, kw + " not allowed under " + signature_name(s));
          } else if constexpr (std::is_same_v<T, cons::ApproxSquare>) {
            allowed(s == SignatureKind::Square1Relaxed && t.eps && k.eps == *t.eps,
                    kw + " not allowed under " + tag_to_string(f));
          }
        },
        c);
    if (!why.empty()) rep.violations.push_back({i, why});
  }
  return rep;
}

}  // namespace ccsp
