#pragma once

#include "ccsp/formula.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ccsp {

enum class WireDir { Right, Left };

struct Wire {
  Var variable;
  WireDir dir = WireDir::Right;
  /// Track at the left end of the diagram.
  std::uint32_t track = 0;
  friend bool operator==(const Wire&, const Wire&) = default;
};

enum class BoxKind { AddLeq, AddGeq, FBox, GBox };

const char* box_kind_name(BoxKind k);

struct Tap {
  std::uint32_t wire = 0;
  /// 1, 2 or 3.
  unsigned position = 1;
  friend bool operator==(const Tap&, const Tap&) = default;
};

struct ConstraintBox {
  BoxKind kind = BoxKind::AddLeq;
  std::vector<Tap> taps;
  /// Index of the encoded constraint in the formula.
  std::size_t constraint = 0;
  friend bool operator==(const ConstraintBox&, const ConstraintBox&) = default;
};

/// Exchanges the wires on tracks `upper` and `upper + 1`.
struct SwapEvent {
  std::uint32_t upper = 0;
  friend bool operator==(const SwapEvent&, const SwapEvent&) = default;
};

using WiringEvent = std::variant<SwapEvent, ConstraintBox>;

/// Tracks are numbered from the top. Event k sits in column k.
struct WiringDiagram {
  std::size_t num_vars = 0;
  std::vector<Wire> wires;
  std::vector<WiringEvent> events;

  std::size_t box_count() const;
  std::size_t swap_count() const;
  friend bool operator==(const WiringDiagram&, const WiringDiagram&) = default;
};

/// Wire index of ->x (right) or <-x (left).
inline std::uint32_t wire_of(Var x, WireDir d) { return 2 * x.index + (d == WireDir::Left ? 1 : 0); }

/// Left-to-right construction: before each box its distinct wires are bubbled to the top tracks
/// in order of first appearance.
WiringDiagram build_diagram(const Formula& f);

struct DiagramReport {
  std::vector<std::string> violations;
  std::size_t boxes = 0;
  std::size_t swaps = 0;

  bool ok() const { return violations.empty(); }
  std::string to_text() const;
};

DiagramReport validate_diagram(const WiringDiagram& d, const Formula& f);

enum class RenderFormat { Structured, Svg };

std::string render(const WiringDiagram& d, const Formula& f, RenderFormat format);

/// Sum over boxes of 1 + k(2 * wires - 1): an upper bound on the events build_diagram emits.
std::size_t event_upper_bound(const Formula& f);

/// Constant of the quartic bound beta * n^4 checked on random formulas.
inline constexpr std::size_t kQuarticBeta = 12;

}  // namespace ccsp
