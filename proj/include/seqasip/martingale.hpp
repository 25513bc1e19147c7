#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "seqasip/chain.hpp"
#include "seqasip/hypothesis.hpp"
#include "seqasip/maps.hpp"
#include "seqasip/step_function.hpp"

namespace seqasip {

/// Observables phi_k, k >= 1. A single entry stands for every k.
class ObservableSequence {
 public:
  explicit ObservableSequence(std::vector<Observable> list);
  static ObservableSequence constant(Observable o) { return ObservableSequence({std::move(o)}); }

  const Observable& at(std::int64_t k) const;
  bool constant() const { return list_.size() == 1; }
  bool all_zero() const;
  std::size_t size() const { return list_.size(); }
  Json to_json() const;

 private:
  std::vector<Observable> list_;
};

enum class DecompositionMode { Sequential, Stationary };

std::string to_string(DecompositionMode m);

struct DecompositionOptions {
  DecompositionMode mode = DecompositionMode::Sequential;
  /// Floor for the denominators P_k 1 in Q_k. Use lb_denominator_floor() to tie it to an LB report.
  double delta_min = 5e-4;
  /// Stationary mode: truncate sum_j P^j phi_{n-j} once C1 gamma0^j ||phi||_BV < tail_tol.
  double tail_tol = 1e-10;
  /// Spectral-gap report for the normalized operator; computed when absent.
  std::optional<HypothesisReport> exa;
};

/// delta_hat / 2 from an LB report.
double lb_denominator_floor(const HypothesisReport& lb);

/// Q_k f = P_k(f * P_{k-1} 1) / P_k 1, cellwise. Throws DenominatorTooSmall.
StepFunction q_apply(ChainState& state, std::int64_t k, const StepFunction& f, double delta_min);

/// One step of the decomposition, with h_{k+1} and psi_k.
struct DecompositionStep {
  std::int64_t k = 0;
  double centering = 0.0;   // c_k, subtracted from phi_k
  StepFunction phi_tilde;   // phi_k - c_k on the grid
  StepFunction h;           // h_k
  StepFunction h_next;      // h_{k+1}
  StepFunction psi;         // phi_tilde + h_k - M_{k+1} h_{k+1}
};

/// Builds the decomposition one index at a time, holding only O(1) grid
/// functions (plus the truncation window in stationary mode with varying
/// observables). Suitable for horizons where storing every h_k is too large.
class DecompositionStepper {
 public:
  DecompositionStepper(ChainState& state, ObservableSequence observables, DecompositionOptions options);

  /// Advances to the next k (starting at 1).
  const DecompositionStep& next();
  const DecompositionStep& current() const { return step_; }
  /// Largest j kept in stationary mode; -1 in sequential mode.
  std::int64_t tail_truncation() const { return tail_; }
  const std::optional<HypothesisReport>& exa() const { return options_.exa; }
  DecompositionMode mode() const { return options_.mode; }
  ChainState& state() { return state_; }
  double delta_min() const { return options_.delta_min; }

 private:
  StepFunction phi_grid(std::int64_t k);
  StepFunction p_hat(const StepFunction& f) const;

  ChainState& state_;
  ObservableSequence obs_;
  DecompositionOptions options_;
  std::size_t cells_;
  DecompositionStep step_;
  std::optional<StepFunction> const_grid_;
  // stationary mode
  StepFunction h_;
  std::shared_ptr<const UlamMatrix> m0_;
  std::int64_t tail_ = -1;
  std::vector<StepFunction> partial_;   // constant observable: H_m = sum_{j=1..m} P^j phi
  std::deque<StepFunction> window_;     // varying observables: P^{k+1-i} phi_i, oldest first
};

struct Decomposition {
  DecompositionMode mode = DecompositionMode::Sequential;
  std::int64_t n_max = 0;
  std::size_t cells = 0;
  std::int64_t tail_truncation = -1;
  std::vector<double> centering;        // index k (0 unused)
  std::vector<StepFunction> phi_tilde;  // index k = 1..n_max
  std::vector<StepFunction> h;          // index k = 1..n_max+1
  std::vector<StepFunction> psi;        // index k = 1..n_max
  double sup_h_bv = 0.0;
  double sup_h_sup = 0.0;

  const StepFunction& h_at(std::int64_t k) const { return h.at(static_cast<std::size_t>(k)); }
  const StepFunction& psi_at(std::int64_t k) const { return psi.at(static_cast<std::size_t>(k)); }
};

Decomposition build_decomposition(ChainState& state, const ObservableSequence& observables, std::int64_t n_max,
                                  DecompositionOptions options = {});

/// ||Q_{k+1} psi_k||_1 for k = 1..n_max (entry k-1).
std::vector<double> check_reverse_martingale(const Decomposition& dec, ChainState& state, double delta_min);

struct ConditionalVariance {
  StepFunction g;        // P_{k+1}(psi_k^2 P_k 1) / P_{k+1} 1
  double second_moment;  // E U_k^2 = int psi_k^2 P_k 1
  double fourth_moment;  // E U_k^4 = int psi_k^4 P_k 1
};

ConditionalVariance conditional_variance_function(const StepFunction& psi, ChainState& state, std::int64_t k,
                                                  double delta_min);
ConditionalVariance conditional_variance_function(const Decomposition& dec, ChainState& state, std::int64_t k,
                                                  double delta_min);

/// U_j(x) = phi_tilde_j(T_j x) + h_j(T_j x) - h_{j+1}(T_{j+1} x) along one orbit,
/// with orbit[j] = T_j x for j = 0..n+1 and grid functions read by cell lookup.
std::vector<double> increments_along(const Decomposition& dec, const ObservableSequence& observables,
                                     std::span<const double> orbit);

struct CmOptions {
  double a_exponent = 0.75;
  /// a_n = n^a_exponent by default; with this flag a_n = sigma_n^a_exponent where
  /// sigma_n^2 = sum_{k<=n} E U_k^2.
  bool a_from_variance = false;
  std::size_t samples = 64;
  std::uint64_t seed = 1;
  /// Starting points; drawn from Lebesgue (or the chain's start density) when empty.
  std::vector<double> sample_points;
  /// Where trajectories are recorded. Default: powers of two up to n_max.
  std::vector<std::int64_t> checkpoints;
};

struct CmDiagnostics {
  double a_exponent = 0.75;
  int v = 2;
  std::vector<std::int64_t> checkpoints;
  std::size_t samples = 0;
  /// S_n(x_s) at checkpoint c: trajectories[s * checkpoints.size() + c].
  std::vector<double> trajectories;
  std::vector<double> a;               // a_n at each checkpoint
  std::vector<double> median_ratio;    // median_s |S_n(x_s)| / a_n
  std::vector<double> max_ratio;
  std::vector<double> b_partial;       // sum_{k<=n} a_k^-2 E U_k^4 at each checkpoint
  std::vector<double> b_running;       // the same sum for every n = 1..n_max (entry n-1)
  std::vector<double> second_moments;  // E U_k^2, k = 1..n_max
};

/// Conditions (A) and (B) along a streamed decomposition of length n_max.
CmDiagnostics cm_diagnostics(ChainState& state, const ObservableSequence& observables,
                             const DecompositionOptions& decomposition, std::int64_t n_max, const CmOptions& options);

/// Container I/O for decompositions (same header+payload format as matrices).
void save_decomposition(const Decomposition& dec, const std::filesystem::path& path);
Decomposition load_decomposition(const std::filesystem::path& path);

}  // namespace seqasip
