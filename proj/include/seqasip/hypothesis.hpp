#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seqasip/maps.hpp"
#include "seqasip/step_function.hpp"
#include "seqasip/ulam.hpp"

namespace seqasip {

enum class HypothesisKind { DFLY, LB, EXA, LIP, POS };

std::string to_string(HypothesisKind k);

/// Outcome of a numerical hypothesis check: fitted constants, the per-step
/// curve they were fitted to, and a pass flag against configured thresholds.
struct HypothesisReport {
  HypothesisKind kind = HypothesisKind::DFLY;
  std::map<std::string, double> constants;
  std::string sample;
  bool pass = false;
  std::string curve_label;
  std::vector<double> curve;

  double constant(const std::string& name) const;
  Json to_json() const;
};

/// BV-normalized test functions on N cells: indicators of the 127 dyadic
/// intervals of levels 0..6, the sawtooth x, and cos(2 pi k x) for k = 1..8.
std::vector<StepFunction> default_dictionary(std::size_t cells);
/// The 127 dyadic indicators alone.
std::vector<StepFunction> dyadic_dictionary(std::size_t cells);

/// Largest ||f M1 - f M2||_1 over the dictionary, each f scaled to ||f||_BV = 1.
/// A lower bound for the operator distance on the BV unit ball.
double operator_distance(const UlamMatrix& m1, const UlamMatrix& m2, const std::vector<StepFunction>& dictionary);

struct DflyOptions {
  std::size_t cells = 1024;
  int n_max = 40;
  int trials = 20;
  std::uint64_t seed = 1;
};

/// Pushes each dictionary element through random concatenations of the family
/// and fits ||P_n f||_BV <= A rho^n ||f||_BV + B ||f||_1.
///
/// B is the largest ratio ||P_n f||_BV / ||f||_1 over the second half of the
/// horizon. The excess over B ||f||_1 is fitted log-linearly while it stays
/// above the rounding floor, and A is then raised until the bound covers every
/// observation. Passes iff rho < 1.
HypothesisReport verify_dfly(const std::vector<IntervalMap>& family, const DflyOptions& options,
                             const std::vector<StepFunction>* dictionary = nullptr);

struct LbOptions {
  std::size_t cells = 1024;
  int n_max = 50;
  int trials = 20;
  std::uint64_t seed = 1;
  double delta_min = 1e-3;
};

/// Smallest cell of P_n 1 over random concatenations; curve[n-1] is the
/// minimum over trials at step n. Passes iff the overall minimum >= delta_min.
HypothesisReport verify_lb(const std::vector<IntervalMap>& family, const LbOptions& options);

struct DecayOptions {
  /// Center by the invariant measure and iterate f -> P(h f)/h instead of the
  /// Lebesgue-centered P.
  bool normalized = false;
  int max_steps = 400;
};

/// Fits sup_f ||P^n f||_BV <= C1 gamma0^n over centered dictionary elements.
HypothesisReport decay_rate(const UlamMatrix& m, const StepFunction& h, const std::vector<StepFunction>& dictionary,
                            const DecayOptions& options = {});

/// Operator distance between base.with_parameter(p + eps) and base (p its own
/// parameter) over eps_grid. "slope" is the least-squares line through the
/// origin, "C3" the smallest constant with d(eps) <= C3 |eps| on the grid.
/// Passes iff the slope is positive and R^2 (uncentered) >= r2_min.
HypothesisReport verify_lip(const IntervalMap& base, std::size_t cells, const std::vector<double>& eps_grid,
                            const std::vector<StepFunction>* dictionary = nullptr, double r2_min = 0.95);

/// inf h over the cells of an invariant density. Passes iff it is >= h_min.
HypothesisReport verify_pos(const StepFunction& h, double h_min = 1e-3);

/// Noise floor used by the log-linear fits: 100 machine epsilons per cell.
double fit_floor(std::size_t cells);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};
/// Least squares of log y on x.
LogLinearFit fit_log_linear(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace seqasip
