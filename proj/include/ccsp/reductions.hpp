#pragma once

#include "ccsp/formula.hpp"
#include "ccsp/funclib.hpp"
#include "ccsp/witness.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ccsp {

/// Sound mode derives the chain length from the approximation lemma; test mode uses a short
/// user-supplied chain and only checks eps <= delta/100.
struct ChainMode {
  std::optional<unsigned> test_L;

  static ChainMode sound() { return {}; }
  static ChainMode test(unsigned L) { return {L}; }
};

/// Smallest L >= 1 with 2^(-2^L) <= min(2^(-2^M), 1) / 100.
std::uint64_t sound_chain_length(std::uint64_t M);

/// Target-formula builder that records one forward evaluator per created variable.
class PassBuilder {
 public:
  explicit PassBuilder(const Formula& src);

  Var var(const std::string& name, ForwardEval eval);
  /// Target copy of a source variable, same name and value.
  Var copy(Var src_var);
  void add(Constraint c) { fb_.add(std::move(c)); }
  /// The variable [0] with [0] + [0] = [0], created on first use.
  Var zero();
  /// b = a
  void equal(Var a, Var b);
  /// New variable a + b.
  Var sum(Var a, Var b, const std::string& name);
  /// New variable a - b.
  Var diff(Var a, Var b, const std::string& name);
  /// New variable q * y.
  Var scaled(Var y, const Rational& q, const std::string& name);
  FnId function(const std::string& name, const UnivariateFn& f);
  FnId function(const std::string& name, const Poly2& f);

  const Formula& source() const { return src_; }
  FormulaBuilder& formula() { return fb_; }
  std::size_t num_vars() const { return fb_.num_vars(); }

  ReductionOutput finish(const std::string& pass, std::function<std::pair<Assignment, Guarantee>(const Assignment&)>
                                                      backward);
  void unavailable(const std::string& why) {
    if (!unavailable_) unavailable_ = why;
  }
  Provenance& provenance() { return prov_; }
  std::map<std::string, Var>& landmarks() { return landmarks_; }

 private:
  const Formula& src_;
  FormulaBuilder fb_;
  std::vector<ForwardEval> evals_;
  std::optional<Var> zero_;
  std::optional<std::string> unavailable_;
  Provenance prov_;
  std::map<std::string, Var> landmarks_;
};

/// Emits constraints forcing x = q * y with a logarithmic doubling ladder.
void scalar_multiple(PassBuilder& b, Var x, Var y, const Rational& q);

/// Projection onto the first n target variables, exact.
Assignment project(const Assignment& tgt, std::size_t n);

ReductionOutput ami_to_square1(const Formula& src);

ReductionOutput square1_to_ce_expl(const Formula& src, const UnivariateFn& f, const Rational& delta,
                                   const ChainMode& mode);

ReductionOutput square1_to_cci_expl(const Formula& src, const UnivariateFn& f, const UnivariateFn& g,
                                    const Rational& delta, const ChainMode& mode);

struct CubicRescale {
  Integer N;
  Rational c;
  UnivariateFn f_star;
  UnivariateFn g_star;
};

/// N is the smallest integer above 10 * max(c_f, c_g); f* = N^2 f(x / N).
CubicRescale rescale_cubic(const UnivariateFn& f, const UnivariateFn& g, const Rational& r);

/// Instance pass CCI_EXPL(f*, g*) -> CCI_EXPL(f, g) for f* = N^2 f(x/N).
ReductionOutput cubic_rescale_pass(const Formula& src, const UnivariateFn& f, const UnivariateFn& g,
                                   const Integer& N);

struct TaylorParams {
  Rational a, b, c, d;
};

/// (a, b) = (f'(0), f''(0)/2), (c, d) likewise for g.
TaylorParams taylor_entry(const UnivariateFn& f, const UnivariateFn& g);

struct LinearNormalization {
  TaylorParams params;
  UnivariateFn f_star;
  UnivariateFn g_star;
  /// 1 + |a| + |b| + |c| + |d|
  Rational K;
};

LinearNormalization normalize_linear(const UnivariateFn& f, const UnivariateFn& g);

/// Instance pass CCI_EXPL(f*, g*) with delta -> CCI_EXPL(f, g) with delta' = K delta.
ReductionOutput linear_normalize_pass(const Formula& src, const UnivariateFn& f, const UnivariateFn& g);

ReductionOutput cci_expl_to_ce_expl(const Formula& src);

/// Working copy of F: optionally swap the arguments, then optionally reflect (x, y) -> (-x, -y).
struct Orientation {
  bool swap = false;
  bool flip = false;
  bool trivial() const { return !swap && !flip; }
};

Poly2 oriented(const Poly2& F, const Orientation& o);

/// CE(F_w) or CCI(F_w, G_w) -> CE(F) or CCI(F, G), where F_w = oriented(F, of).
ReductionOutput signflip_wrap(const Formula& src, const Poly2& F, const Orientation& of, const Poly2* G = nullptr,
                              const Orientation& og = {});

/// CE_EXPL(f) -> CE(F) or CCI_EXPL(f, g) -> CCI(F, G) where f, g are the explicit branches of F, G.
ReductionOutput explicit_to_implicit(const Formula& src, const Poly2& F, const Poly2* G = nullptr);

/// Explicit function of an oriented curve: its polynomial graph when F = l*(y - p(x)), else the branch.
UnivariateFn explicit_of(const Poly2& F);

struct PipelineTarget {
  SignatureKind kind = SignatureKind::Ce;
  Poly2 F;
  std::optional<Poly2> G;
};

struct PipelineOptions {
  /// Radius of the final formula. The explicit stages run at delta / K when normalization rescales.
  Rational delta = Rational(1, 8);
  ChainMode mode = ChainMode::test(2);
};

struct PipelineResult {
  std::vector<ReductionOutput> stages;
  /// L, M, N, a, b, c, d, delta' and the orientation decisions.
  Provenance summary;

  const Formula& final_formula() const { return stages.back().target; }
  /// Composition of the stage forward maps.
  Assignment forward(const Assignment& src) const;
};

PipelineResult pipeline(const Formula& ami, const PipelineTarget& target, const PipelineOptions& opt);

struct FactCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string detail;
  bool holds() const { return checked > 0 && failures == 0; }
};

/// The realized-chain facts behind square1_to_ce_expl for polynomial f in test mode.
std::vector<FactCheck> ce_expl_facts(const Poly1& f, const Rational& delta, unsigned L, std::size_t grid_points);

/// The seven facts behind square1_to_cci_expl, along the forward chain delta_i = g(delta_{i-1}).
std::vector<FactCheck> cci_expl_facts(const Poly1& f, const Poly1& g, const Rational& delta, unsigned L,
                                      std::size_t grid_points);

/// Points -delta + 2 delta k / n for k = 0..n, skipping 0.
std::vector<Rational> fact_grid(const Rational& delta, std::size_t n);

}  // namespace ccsp
