#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seqasip/hypothesis.hpp"
#include "seqasip/maps.hpp"
#include "seqasip/martingale.hpp"
#include "seqasip/step_function.hpp"
#include "seqasip/ulam.hpp"

namespace seqasip {

/// n = start * 2^(j / per_octave), rounded and deduplicated, up to n_max; n_max is always included.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t start, std::int64_t n_max, int per_octave = 1);

struct EnsembleSpec {
  std::int64_t n_max = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  /// Defaults to geometric_checkpoints(64, n_max).
  std::vector<std::int64_t> checkpoints;
  /// Initial points drawn from this density (inverse CDF); Lebesgue when empty.
  std::optional<StepFunction> initial_density;
};

/// Partial sums S_n(x_i) at the checkpoints for i = 0..samples-1.
struct EnsembleResult {
  std::vector<std::int64_t> checkpoints;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Json descriptor;
  std::vector<double> sums;  // sums[i * checkpoints.size() + c]

  double at(std::size_t i, std::size_t c) const { return sums[i * checkpoints.size() + c]; }
  std::vector<double> column(std::size_t c) const;
  std::size_t index_of(std::int64_t n) const;
};

/// c_k = int phi_k (P_k 1) dm for k = 1..n (entry k-1), streamed over the chain on N cells.
std::vector<double> sequential_centering(const SequentialSystem& system, const ObservableSequence& observables,
                                         std::int64_t n, std::size_t cells);
/// c = int phi h dm against an invariant density, repeated n times.
std::vector<double> stationary_centering(const ObservableSequence& observables, const StepFunction& h, std::int64_t n);

/// S_n(x) = sum_{k<=n} (phi_k(T_k x) - c_k) over independent orbits, one RNG
/// substream per orbit. The OpenMP path and the serial path give identical bytes.
EnsembleResult ensemble_birkhoff(const SequentialSystem& system, const ObservableSequence& observables,
                                 const std::vector<double>& centering, const EnsembleSpec& spec);
EnsembleResult ensemble_birkhoff_serial(const SequentialSystem& system, const ObservableSequence& observables,
                                        const std::vector<double>& centering, const EnsembleSpec& spec);

/// Test hook: partial sums of i.i.d. N(0,1) increments with the same layout and seeding.
EnsembleResult ensemble_gaussian(const EnsembleSpec& spec);

double sample_mean(const std::vector<double>& v);
/// Unbiased sample variance.
double sample_variance(const std::vector<double>& v);

struct VarianceCurve {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> variance;
  std::vector<double> standard_error;
  double exponent = 0.0;  // slope of log variance on log n
  double ci_low = 0.0;    // 95% bootstrap interval
  double ci_high = 0.0;
  std::size_t fit_points = 0;
  int bootstrap = 0;
};

VarianceCurve variance_curve(const EnsembleResult& ens, int bootstrap = 1000, std::uint64_t seed = 1);

struct CltOptions {
  /// Subtracted before standardizing (e.g. E_n for hit counts).
  double center = 0.0;
  /// Add U(-1/2, 1/2) to every sample to break ties of integer-valued data.
  bool jitter = false;
  std::uint64_t seed = 1;
};

struct CltReport {
  std::int64_t n = 0;
  std::size_t samples = 0;
  double ks_statistic = 0.0;
  double p_value = 0.0;
  double mean = 0.0;  // of the standardized sample
  double sd = 0.0;    // sigma_hat used for standardizing
  double skewness = 0.0;
};

/// Kolmogorov distribution tail P(K > lambda).
double kolmogorov_survival(double lambda);
double normal_cdf(double z);
/// One-sample KS statistic of `values` against N(0,1).
double ks_statistic_normal(std::vector<double> values);

CltReport clt_test(const EnsembleResult& ens, std::int64_t at_n, const CltOptions& options = {});
CltReport clt_test(std::vector<double> values, std::int64_t n, const CltOptions& options = {});

struct LilReport {
  std::vector<std::int64_t> checkpoints;  // where log log sigma_n^2 > 0
  std::vector<double> sigma2;
  std::int64_t window_start = 0;
  int window_octaves = 10;
  std::vector<double> windowed_sup;  // per trajectory
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

/// L_n = S_n / sqrt(2 s_n^2 log log s_n^2) with s_n^2 the ensemble variance,
/// and per trajectory the sup of L_n over checkpoints n >= n_final / 2^window_octaves.
LilReport lil_profile(const EnsembleResult& ens, int window_octaves = 10);

double quantile(std::vector<double> v, double q);

struct GreenKubo {
  double sigma2 = 0.0;
  std::int64_t terms = 0;
  double removed_mean = 0.0;  // int phi h, subtracted before summing
  double tail_bound = 0.0;
};

/// sigma^2 = int (G phi - K(P^ G phi))^2 h dm with G phi = sum_k P^k phi, P^ f = P(h f)/h
/// and K the Koopman action of the same matrix.
GreenKubo green_kubo_variance(const UlamMatrix& m0, const StepFunction& h, const StepFunction& phi, double tail_tol,
                              const HypothesisReport* exa = nullptr);
GreenKubo green_kubo_variance(const UlamMatrix& m0, const StepFunction& h, const Observable& phi, double tail_tol,
                              const HypothesisReport* exa = nullptr);

struct ShrinkingTargetSpec {
  TargetSequence targets;
  std::int64_t n_max = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  std::size_t cells = 1024;  // grid for the invariant density
  std::vector<std::int64_t> checkpoints;
  int bootstrap = 1000;
  bool jitter = true;
};

struct ShrinkingTargetResult {
  EnsembleResult hits;
  std::vector<double> expected;   // E_n = sum_{j<=n} mu(A_j) at each checkpoint
  std::vector<double> mean_hits;  // ensemble mean at each checkpoint
  /// Absent when the hit counts never vary (e.g. empty targets).
  std::optional<VarianceCurve> variance;
  std::optional<CltReport> clt;
  bool warning = false;
};

/// Hit counts of T^j x in A_j for x drawn from the invariant density.
ShrinkingTargetResult shrinking_target(const SequentialSystem& system, const ShrinkingTargetSpec& spec);

}  // namespace seqasip
