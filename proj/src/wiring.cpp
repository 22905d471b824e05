#include "ccsp/wiring.hpp"

#include "ccsp/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace ccsp {

const char* box_kind_name(BoxKind k) {
  switch (k) {
    case BoxKind::AddLeq: return "ADD_LEQ";
    case BoxKind::AddGeq: return "ADD_GEQ";
    case BoxKind::FBox: return "F_BOX";
    case BoxKind::GBox: return "G_BOX";
  }
  return "?";
}

std::size_t WiringDiagram::box_count() const {
  return std::count_if(events.begin(), events.end(),
                       [](const WiringEvent& e) { return std::holds_alternative<ConstraintBox>(e); });
}

std::size_t WiringDiagram::swap_count() const { return events.size() - box_count(); }

namespace {

WireDir dir_of(BoxKind k) { return k == BoxKind::AddLeq || k == BoxKind::GBox ? WireDir::Right : WireDir::Left; }

std::size_t arity_of(BoxKind k) { return k == BoxKind::AddLeq || k == BoxKind::AddGeq ? 3 : 2; }

struct Demand {
  BoxKind kind;
  std::vector<Var> vars;
};

/// Boxes a constraint needs, in emission order. Empty for constraints the diagram does not encode.
std::vector<Demand> demands_of(const Constraint& c, const SignatureTag& tag) {
  if (const auto* a = std::get_if<cons::Add>(&c))
    return {{BoxKind::AddLeq, {a->x, a->y, a->z}}, {BoxKind::AddGeq, {a->x, a->y, a->z}}};
  if (const auto* g = std::get_if<cons::ImplicitGeq>(&c)) {
    if (g->f == *tag.f) return {{BoxKind::FBox, {g->x, g->y}}};
    if (tag.g && g->f == *tag.g) return {{BoxKind::GBox, {g->x, g->y}}};
    throw Error(Errc::SignatureError, "impl-geq references a function outside the tag");
  }
  if (std::holds_alternative<cons::Nonneg>(c) || std::holds_alternative<cons::EqConst>(c)) return {};
  throw Error(Errc::SignatureError, std::string("wiring: constraint '") + keyword(c) + "' is not part of CCI");
}

/// Distinct wires in order of first appearance; tap i wants its wire at the rank of that wire.
std::vector<std::uint32_t> distinct(const std::vector<Tap>& taps) {
  std::vector<std::uint32_t> out;
  for (const Tap& t : taps)
    if (std::find(out.begin(), out.end(), t.wire) == out.end()) out.push_back(t.wire);
  return out;
}

std::string wire_label(const Formula& f, const Wire& w) {
  return std::string(w.dir == WireDir::Right ? "->" : "<-") + f.name(w.variable);
}

}  // namespace

WiringDiagram build_diagram(const Formula& f) {
  if (f.tag().kind != SignatureKind::Cci)
    throw Error(Errc::SignatureError, std::string("wiring needs a CCI formula, got ") + signature_name(f.tag().kind));
  WiringDiagram d;
  d.num_vars = f.num_vars();
  const std::uint32_t W = static_cast<std::uint32_t>(2 * d.num_vars);
  std::vector<std::uint32_t> at(W), track(W);
  for (std::uint32_t i = 0; i < d.num_vars; ++i) {
    d.wires.push_back({Var{i}, WireDir::Right, 2 * i});
    d.wires.push_back({Var{i}, WireDir::Left, 2 * i + 1});
  }
  for (std::uint32_t w = 0; w < W; ++w) at[w] = track[w] = w;

  for (std::size_t ci = 0; ci < f.constraints().size(); ++ci) {
    for (const Demand& dm : demands_of(f.constraints()[ci], f.tag())) {
      ConstraintBox box{dm.kind, {}, ci};
      for (std::size_t p = 0; p < dm.vars.size(); ++p)
        box.taps.push_back({wire_of(dm.vars[p], dir_of(dm.kind)), static_cast<unsigned>(p + 1)});
      const auto need = distinct(box.taps);
      for (std::uint32_t rank = 0; rank < need.size(); ++rank) {
        while (track[need[rank]] > rank) {
          const std::uint32_t t = track[need[rank]] - 1;
          d.events.emplace_back(SwapEvent{t});
          std::swap(at[t], at[t + 1]);
          track[at[t]] = t;
          track[at[t + 1]] = t + 1;
        }
      }
      d.events.emplace_back(std::move(box));
    }
  }
  return d;
}

DiagramReport validate_diagram(const WiringDiagram& d, const Formula& f) {
  DiagramReport rep;
  auto bad = [&](const std::string& msg) { rep.violations.push_back(msg); };
  const std::size_t W = d.wires.size();
  if (d.num_vars != f.num_vars())
    bad("diagram has " + std::to_string(d.num_vars) + " variables, formula has " + std::to_string(f.num_vars()));
  if (W != 2 * f.num_vars()) bad("expected " + std::to_string(2 * f.num_vars()) + " wires, found " + std::to_string(W));

  std::vector<std::uint32_t> at(W, UINT32_MAX);
  std::map<std::pair<std::uint32_t, WireDir>, std::size_t> per_var;
  for (std::uint32_t w = 0; w < W; ++w) {
    const Wire& wr = d.wires[w];
    if (wr.variable.index >= f.num_vars()) {
      bad("wire " + std::to_string(w) + " names an unknown variable");
      continue;
    }
    ++per_var[{wr.variable.index, wr.dir}];
    if (wr.track >= W || at[wr.track] != UINT32_MAX)
      bad("wire " + std::to_string(w) + " has an invalid or shared start track");
    else
      at[wr.track] = w;
  }
  for (std::uint32_t v = 0; v < f.num_vars(); ++v)
    for (WireDir dir : {WireDir::Right, WireDir::Left})
      if (per_var[{v, dir}] != 1)
        bad("variable " + f.name(Var{v}) + " needs exactly one " + (dir == WireDir::Right ? "right" : "left") +
            "-oriented wire");
  if (!rep.ok()) return rep;

  std::vector<std::uint32_t> track(W);
  for (std::uint32_t t = 0; t < W; ++t) track[at[t]] = t;

  // Expected boxes per constraint, consumed as they are matched.
  std::vector<std::vector<Demand>> expected;
  for (const auto& c : f.constraints()) {
    try {
      expected.push_back(demands_of(c, f.tag()));
    } catch (const Error& e) {
      bad(e.what());
      expected.emplace_back();
    }
  }
  std::vector<std::vector<bool>> seen;
  for (const auto& e : expected) seen.emplace_back(e.size(), false);

  for (std::size_t col = 0; col < d.events.size(); ++col) {
    const std::string where = "column " + std::to_string(col) + ": ";
    if (const auto* s = std::get_if<SwapEvent>(&d.events[col])) {
      ++rep.swaps;
      if (s->upper + 1 >= W) {
        bad(where + "swap of non-adjacent or missing tracks " + std::to_string(s->upper));
        continue;
      }
      std::swap(at[s->upper], at[s->upper + 1]);
      track[at[s->upper]] = s->upper;
      track[at[s->upper + 1]] = s->upper + 1;
      continue;
    }
    const auto& box = std::get<ConstraintBox>(d.events[col]);
    ++rep.boxes;
    const std::string name = box_kind_name(box.kind);
    if (box.taps.size() != arity_of(box.kind)) {
      bad(where + name + " has " + std::to_string(box.taps.size()) + " taps");
      continue;
    }
    bool taps_ok = true;
    for (std::size_t i = 0; i < box.taps.size(); ++i) {
      const Tap& t = box.taps[i];
      if (t.wire >= W || t.position != i + 1) {
        bad(where + name + " has a malformed tap");
        taps_ok = false;
        break;
      }
      if (d.wires[t.wire].dir != dir_of(box.kind)) {
        bad(where + name + " taps a " + (d.wires[t.wire].dir == WireDir::Right ? "right" : "left") +
            "-oriented wire at l" + std::to_string(t.position));
        taps_ok = false;
      }
    }
    if (!taps_ok) continue;
    const auto need = distinct(box.taps);
    for (std::uint32_t rank = 0; rank < need.size(); ++rank)
      if (track[need[rank]] != rank)
        bad(where + name + " wire " + wire_label(f, d.wires[need[rank]]) + " is on track " +
            std::to_string(track[need[rank]]) + ", expected " + std::to_string(rank));
    // Match against the constraint it claims to encode.
    if (box.constraint >= expected.size()) {
      bad(where + name + " refers to missing constraint " + std::to_string(box.constraint));
      continue;
    }
    std::vector<Var> vars;
    for (const Tap& t : box.taps) vars.push_back(d.wires[t.wire].variable);
    bool matched = false;
    for (std::size_t k = 0; k < expected[box.constraint].size(); ++k) {
      const Demand& dm = expected[box.constraint][k];
      if (dm.kind == box.kind && dm.vars == vars && !seen[box.constraint][k]) {
        seen[box.constraint][k] = true;
        matched = true;
        break;
      }
    }
    if (!matched) bad(where + name + " does not match constraint " + std::to_string(box.constraint));
  }
  for (std::size_t ci = 0; ci < expected.size(); ++ci)
    for (std::size_t k = 0; k < expected[ci].size(); ++k)
      if (!seen[ci][k]) {
        const bool add = std::holds_alternative<cons::Add>(f.constraints()[ci]);
        bad("constraint " + std::to_string(ci) + ": missing " + box_kind_name(expected[ci][k].kind) +
            (add ? " (unpaired addition)" : ""));
      }
  return rep;
}

std::string DiagramReport::to_text() const {
  std::ostringstream os;
  os << "boxes " << boxes << ", swaps " << swaps << ", violations " << violations.size() << "\n";
  for (const auto& v : violations) os << "violation: " << v << "\n";
  return os.str();
}

std::size_t event_upper_bound(const Formula& f) {
  const std::size_t W = 2 * f.num_vars();
  std::size_t total = 0;
  for (const auto& c : f.constraints())
    for (const Demand& dm : demands_of(c, f.tag())) total += 1 + dm.vars.size() * (W > 0 ? W - 1 : 0);
  return total;
}

namespace {

std::string render_structured(const WiringDiagram& d, const Formula& f) {
  std::ostringstream os;
  os << "wiring diagram: " << d.num_vars << " variables, " << d.wires.size() << " wires, " << d.events.size()
     << " events\n";
  for (std::size_t w = 0; w < d.wires.size(); ++w)
    os << "wire " << w << ": " << wire_label(f, d.wires[w]) << " track " << d.wires[w].track << "\n";
  for (std::size_t col = 0; col < d.events.size(); ++col) {
    os << "column " << col << ": ";
    if (const auto* s = std::get_if<SwapEvent>(&d.events[col])) {
      os << "swap " << s->upper << "/" << s->upper + 1 << "\n";
      continue;
    }
    const auto& box = std::get<ConstraintBox>(d.events[col]);
    os << "box " << box_kind_name(box.kind) << " taps";
    for (const Tap& t : box.taps) os << " " << wire_label(f, d.wires[t.wire]) << "@l" << t.position;
    os << " constraint " << box.constraint << "\n";
  }
  return os.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_svg(const WiringDiagram& d, const Formula& f) {
  constexpr int kLeft = 80, kCol = 36, kRow = 24, kTop = 20;
  const int W = static_cast<int>(d.wires.size());
  const int cols = static_cast<int>(d.events.size());
  const int width = kLeft * 2 + kCol * std::max(cols, 1);
  const int height = kTop * 2 + kRow * std::max(W, 1);
  auto y_of = [&](int t) { return kTop + kRow * t + kRow / 2; };
  auto x_of = [&](int c) { return kLeft + kCol * c; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  std::vector<int> at(W);
  for (int w = 0; w < W; ++w) at[d.wires[w].track] = w;
  for (int t = 0; t < W; ++t)
    os << "<text x=\"4\" y=\"" << y_of(t) + 4 << "\" font-size=\"11\">" << xml_escape(wire_label(f, d.wires[at[t]]))
       << "</text>\n";
  for (int c = 0; c < cols; ++c) {
    const int x0 = x_of(c), x1 = x_of(c + 1);
    if (const auto* s = std::get_if<SwapEvent>(&d.events[c])) {
      const int u = static_cast<int>(s->upper);
      for (int t = 0; t < W; ++t)
        if (t != u && t != u + 1)
          os << "<line x1=\"" << x0 << "\" y1=\"" << y_of(t) << "\" x2=\"" << x1 << "\" y2=\"" << y_of(t)
             << "\" stroke=\"black\"/>\n";
      os << "<line x1=\"" << x0 << "\" y1=\"" << y_of(u) << "\" x2=\"" << x1 << "\" y2=\"" << y_of(u + 1)
         << "\" stroke=\"black\"/>\n";
      os << "<line x1=\"" << x0 << "\" y1=\"" << y_of(u + 1) << "\" x2=\"" << x1 << "\" y2=\"" << y_of(u)
         << "\" stroke=\"black\"/>\n";
      std::swap(at[u], at[u + 1]);
      continue;
    }
    for (int t = 0; t < W; ++t)
      os << "<line x1=\"" << x0 << "\" y1=\"" << y_of(t) << "\" x2=\"" << x1 << "\" y2=\"" << y_of(t)
         << "\" stroke=\"black\"/>\n";
    const auto& box = std::get<ConstraintBox>(d.events[c]);
    const int rows = static_cast<int>(distinct(box.taps).size());
    os << "<rect x=\"" << x0 + 4 << "\" y=\"" << kTop + 2 << "\" width=\"" << kCol - 8 << "\" height=\""
       << kRow * rows - 4 << "\" fill=\"#ddeeff\" stroke=\"#225\"/>\n";
    os << "<text x=\"" << x0 + 6 << "\" y=\"" << kTop + kRow * rows + 10 << "\" font-size=\"8\">"
       << box_kind_name(box.kind) << "</text>\n";
    for (const Tap& t : box.taps) {
      int rank = 0;
      for (int r = 0; r < rows; ++r)
        if (static_cast<std::uint32_t>(at[r]) == t.wire) rank = r;
      os << "<text x=\"" << x0 + 8 << "\" y=\"" << y_of(rank) + 3 << "\" font-size=\"8\">l" << t.position
         << "</text>\n";
    }
  }
  for (int t = 0; t < W; ++t)
    os << "<text x=\"" << x_of(std::max(cols, 1)) + 4 << "\" y=\"" << y_of(t) + 4 << "\" font-size=\"11\">"
       << xml_escape(wire_label(f, d.wires[at[t]])) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string render(const WiringDiagram& d, const Formula& f, RenderFormat format) {
  return format == RenderFormat::Svg ? render_svg(d, f) : render_structured(d, f);
}

}  // namespace ccsp
