#include "seqasip/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seqasip/chain.hpp"
#include "seqasip/errors.hpp"
#include "seqasip/orbit.hpp"
#include "seqasip/rng.hpp"

namespace seqasip {

namespace {

constexpr std::uint64_t kBootstrapTag = 0xb5ad4eceda1ce2a9ULL;
constexpr std::uint64_t kJitterTag = 0x6a09e667f3bcc909ULL;

void check_checkpoints(const std::vector<std::int64_t>& cps, std::int64_t n_max) {
  if (cps.empty()) throw InvalidArgument("at least one checkpoint is required");
  for (std::size_t c = 0; c < cps.size(); ++c) {
    if (cps[c] < 1 || cps[c] > n_max || (c > 0 && cps[c] <= cps[c - 1])) {
      throw InvalidArgument("checkpoints must increase strictly inside [1, n_max]");
    }
  }
}

EnsembleResult ensemble_impl(const SequentialSystem& system, const ObservableSequence& observables,
                             const std::vector<double>& centering, const EnsembleSpec& spec, bool parallel) {
  if (spec.n_max < 1) throw InvalidArgument("n_max must be >= 1");
  if (spec.samples < 2) throw InvalidArgument("M must be >= 2");
  if (!centering.empty() && centering.size() < static_cast<std::size_t>(spec.n_max)) {
    throw InvalidArgument("centering constants must cover n_max steps");
  }
  if (!observables.constant() && observables.size() < static_cast<std::size_t>(spec.n_max)) {
    throw InvalidArgument("observable sequence shorter than n_max");
  }
  EnsembleResult r;
  r.checkpoints = spec.checkpoints.empty() ? geometric_checkpoints(64, spec.n_max) : spec.checkpoints;
  check_checkpoints(r.checkpoints, spec.n_max);
  r.samples = spec.samples;
  r.seed = spec.seed;
  r.descriptor = {{"system", system.to_json()},
                  {"observable", observables.to_json()},
                  {"initial", spec.initial_density ? "density" : "lebesgue"}};

  const MapSequence maps(system, spec.n_max);
  std::vector<MapStepper> steppers;
  if (maps.stationary()) {
    steppers.emplace_back(maps.at(1));
  } else {
    steppers.reserve(static_cast<std::size_t>(spec.n_max));
    for (std::int64_t k = 1; k <= spec.n_max; ++k) steppers.emplace_back(maps.at(k));
  }
  std::optional<DensitySampler> sampler;
  if (spec.initial_density) sampler.emplace(*spec.initial_density);
  const bool const_obs = observables.constant();
  const Observable& obs0 = observables.at(1);

  const std::size_t nc = r.checkpoints.size();
  r.sums.assign(spec.samples * nc, 0.0);
  const auto m = static_cast<std::int64_t>(spec.samples);
  const std::int64_t n_max = spec.n_max;
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (std::int64_t i = 0; i < m; ++i) {
    Stream rng(spec.seed, static_cast<std::uint64_t>(i));
    OrbitWalker w;
    if (sampler) {
      w.start_at((*sampler)(rng));
    } else {
      w.start_uniform(rng);
    }
    double s = 0.0;
    std::size_t c = 0;
    double* out = &r.sums[static_cast<std::size_t>(i) * nc];
    for (std::int64_t k = 1; k <= n_max; ++k) {
      const MapStepper& st = steppers.size() == 1 ? steppers[0] : steppers[static_cast<std::size_t>(k - 1)];
      const double y = w.step(st, rng);
      const double v = const_obs ? obs0(y) : observables.at(k)(y);
      s += centering.empty() ? v : v - centering[static_cast<std::size_t>(k - 1)];
      if (r.checkpoints[c] == k) {
        out[c] = s;
        if (++c == nc) break;
      }
    }
  }
  return r;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

double log_slope(const std::vector<std::int64_t>& cps, const std::vector<double>& var) {
  std::vector<double> x, y;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    if (var[c] > 0.0) {
      x.push_back(std::log(static_cast<double>(cps[c])));
      y.push_back(std::log(var[c]));
    }
  }
  if (x.size() < 2) return NAN;
  return fit_slope(x, y);
}

}  // namespace

std::vector<std::int64_t> geometric_checkpoints(std::int64_t start, std::int64_t n_max, int per_octave) {
  if (start < 1 || per_octave < 1) throw InvalidArgument("checkpoint start and density must be positive");
  std::vector<std::int64_t> out;
  for (int j = 0;; ++j) {
    const double v = static_cast<double>(start) * std::exp2(static_cast<double>(j) / per_octave);
    const auto n = static_cast<std::int64_t>(std::llround(v));
    if (n > n_max) break;
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  if (out.empty() || out.back() != n_max) out.push_back(n_max);
  return out;
}

std::vector<double> EnsembleResult::column(std::size_t c) const {
  std::vector<double> v(samples);
  for (std::size_t i = 0; i < samples; ++i) v[i] = at(i, c);
  return v;
}

std::size_t EnsembleResult::index_of(std::int64_t n) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), n);
  if (it == checkpoints.end()) throw InvalidArgument("n=" + std::to_string(n) + " is not a checkpoint");
  return static_cast<std::size_t>(it - checkpoints.begin());
}

std::vector<double> sequential_centering(const SequentialSystem& system, const ObservableSequence& observables,
                                         std::int64_t n, std::size_t cells) {
  ChainOptions opt;
  opt.keep_history = false;
  ChainState chain(system, cells, opt);
  std::optional<StepFunction> grid;
  if (observables.constant()) grid = observables.at(1).to_grid(cells);
  std::vector<double> c;
  c.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; k <= n; ++k) {
    const StepFunction g = grid ? *grid : observables.at(k).to_grid(cells);
    c.push_back(inner(g, chain.density(k)));
  }
  return c;
}

std::vector<double> stationary_centering(const ObservableSequence& observables, const StepFunction& h, std::int64_t n) {
  std::vector<double> c;
  c.reserve(static_cast<std::size_t>(n));
  std::optional<double> fixed;
  if (observables.constant()) fixed = inner(observables.at(1).to_grid(h.size()), h);
  for (std::int64_t k = 1; k <= n; ++k) c.push_back(fixed ? *fixed : inner(observables.at(k).to_grid(h.size()), h));
  return c;
}

EnsembleResult ensemble_birkhoff(const SequentialSystem& system, const ObservableSequence& observables,
                                 const std::vector<double>& centering, const EnsembleSpec& spec) {
  return ensemble_impl(system, observables, centering, spec, true);
}

EnsembleResult ensemble_birkhoff_serial(const SequentialSystem& system, const ObservableSequence& observables,
                                        const std::vector<double>& centering, const EnsembleSpec& spec) {
  return ensemble_impl(system, observables, centering, spec, false);
}

EnsembleResult ensemble_gaussian(const EnsembleSpec& spec) {
  if (spec.n_max < 1 || spec.samples == 0) throw InvalidArgument("n_max and M must be positive");
  EnsembleResult r;
  r.checkpoints = spec.checkpoints.empty() ? geometric_checkpoints(64, spec.n_max) : spec.checkpoints;
  check_checkpoints(r.checkpoints, spec.n_max);
  r.samples = spec.samples;
  r.seed = spec.seed;
  r.descriptor = {{"system", "iid_normal"}};
  const std::size_t nc = r.checkpoints.size();
  r.sums.assign(spec.samples * nc, 0.0);
  const auto m = static_cast<std::int64_t>(spec.samples);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < m; ++i) {
    Stream rng(spec.seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    std::size_t c = 0;
    for (std::int64_t k = 1; k <= spec.n_max && c < nc; ++k) {
      s += rng.normal();
      if (r.checkpoints[c] == k) r.sums[static_cast<std::size_t>(i) * nc + c++] = s;
    }
  }
  return r;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

VarianceCurve variance_curve(const EnsembleResult& ens, int bootstrap, std::uint64_t seed) {
  const std::size_t nc = ens.checkpoints.size();
  if (nc < 5) throw InvalidArgument("variance exponent fit needs at least 5 checkpoints (got " + std::to_string(nc) + ")");
  if (ens.samples < 2) throw InvalidArgument("variance needs at least two samples");
  VarianceCurve vc;
  vc.checkpoints = ens.checkpoints;
  vc.bootstrap = bootstrap;
  std::vector<double> means(nc);
  const auto m = static_cast<double>(ens.samples);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto col = ens.column(c);
    const double mean = sample_mean(col);
    means[c] = mean;
    double s2 = 0, s4 = 0;
    for (double x : col) {
      const double d = (x - mean) * (x - mean);
      s2 += d;
      s4 += d * d;
    }
    const double var = s2 / (m - 1.0);
    const double m4 = s4 / m;
    vc.variance.push_back(var);
    const double se2 = (m4 - (m - 3.0) / (m - 1.0) * var * var) / m;
    vc.standard_error.push_back(std::sqrt(std::max(0.0, se2)));
  }
  if (!(vc.variance.back() > 0.0)) throw DegenerateVariance("ensemble variance is zero at the final checkpoint");
  vc.fit_points = static_cast<std::size_t>(std::count_if(vc.variance.begin(), vc.variance.end(), [](double v) { return v > 0.0; }));
  if (vc.fit_points < 5) throw DegenerateVariance("fewer than 5 checkpoints with positive variance");
  vc.exponent = log_slope(vc.checkpoints, vc.variance);

  if (bootstrap > 0) {
    std::vector<double> slopes(static_cast<std::size_t>(bootstrap));
#pragma omp parallel for schedule(dynamic, 4)
    for (int b = 0; b < bootstrap; ++b) {
      Stream rng(seed ^ kBootstrapTag, static_cast<std::uint64_t>(b));
      std::vector<std::size_t> idx(ens.samples);
      for (auto& i : idx) i = static_cast<std::size_t>(rng.below(ens.samples));
      std::vector<double> var(nc);
      for (std::size_t c = 0; c < nc; ++c) {
        double s = 0, s2 = 0;
        for (auto i : idx) {
          const double d = ens.at(i, c) - means[c];
          s += d;
          s2 += d * d;
        }
        var[c] = (s2 - s * s / m) / (m - 1.0);
      }
      slopes[static_cast<std::size_t>(b)] = log_slope(vc.checkpoints, var);
    }
    vc.ci_low = quantile(slopes, 0.025);
    vc.ci_high = quantile(slopes, 0.975);
  } else {
    vc.ci_low = vc.ci_high = vc.exponent;
  }
  return vc;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1) ? term : -term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic_normal(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto m = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf(values[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

CltReport clt_test(std::vector<double> values, std::int64_t n, const CltOptions& opt) {
  if (values.size() < 2) throw InvalidArgument("CLT test needs at least two samples");
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] -= opt.center;
    if (opt.jitter) {
      Stream js(opt.seed ^ kJitterTag, i);
      values[i] += js.uniform() - 0.5;
    }
  }
  const double var = sample_variance(values);
  if (!(var > 0.0) || !std::isfinite(var)) throw DegenerateVariance("sample variance is zero at n=" + std::to_string(n));
  CltReport r;
  r.n = n;
  r.samples = values.size();
  r.sd = std::sqrt(var);
  const double mean = sample_mean(values);
  double m3 = 0.0;
  for (double x : values) m3 += std::pow(x - mean, 3);
  r.skewness = m3 / static_cast<double>(values.size()) / std::pow(var, 1.5);
  for (double& x : values) x /= r.sd;
  r.mean = mean / r.sd;
  r.ks_statistic = ks_statistic_normal(std::move(values));
  r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(r.samples)) * r.ks_statistic);
  return r;
}

CltReport clt_test(const EnsembleResult& ens, std::int64_t at_n, const CltOptions& opt) {
  return clt_test(ens.column(ens.index_of(at_n)), at_n, opt);
}

double quantile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

LilReport lil_profile(const EnsembleResult& ens, int window_octaves) {
  LilReport r;
  r.window_octaves = window_octaves;
  const std::size_t nc = ens.checkpoints.size();
  std::vector<std::size_t> usable;
  for (std::size_t c = 0; c < nc; ++c) {
    const double s2 = sample_variance(ens.column(c));
    if (s2 > std::numbers::e) {
      usable.push_back(c);
      r.checkpoints.push_back(ens.checkpoints[c]);
      r.sigma2.push_back(s2);
    }
  }
  if (usable.empty() || usable.back() != nc - 1) {
    throw DegenerateVariance("ensemble variance never exceeds e, so log log s_n^2 is undefined");
  }
  const std::int64_t n_final = ens.checkpoints.back();
  r.window_start = static_cast<std::int64_t>(std::ceil(std::ldexp(static_cast<double>(n_final), -window_octaves)));
  r.windowed_sup.assign(ens.samples, -INFINITY);
  for (std::size_t u = 0; u < usable.size(); ++u) {
    if (r.checkpoints[u] < r.window_start) continue;
    const double s2 = r.sigma2[u];
    const double norm = std::sqrt(2.0 * s2 * std::log(std::log(s2)));
    for (std::size_t i = 0; i < ens.samples; ++i) {
      r.windowed_sup[i] = std::max(r.windowed_sup[i], ens.at(i, usable[u]) / norm);
    }
  }
  r.median = quantile(r.windowed_sup, 0.5);
  r.q05 = quantile(r.windowed_sup, 0.05);
  r.q95 = quantile(r.windowed_sup, 0.95);
  return r;
}

GreenKubo green_kubo_variance(const UlamMatrix& m0, const StepFunction& h, const StepFunction& phi, double tail_tol,
                              const HypothesisReport* exa) {
  const std::size_t n = m0.size();
  if (h.size() != n || phi.size() != n) throw DimensionMismatch("Green-Kubo inputs on different grids");
  if (!(h.min() > 0.0)) throw DenominatorTooSmall("invariant density must be positive for the normalized operator");
  if (!(tail_tol > 0.0)) throw InvalidArgument("tail_tol must be positive");
  HypothesisReport own;
  if (!exa) {
    DecayOptions d;
    d.normalized = true;
    own = decay_rate(m0, h, default_dictionary(n), d);
    exa = &own;
  }
  const double gamma = exa->constant("gamma0");
  const double c1 = exa->constant("C1");
  if (!(gamma < 1.0)) throw NonConvergentTail("gamma0 = " + std::to_string(gamma) + " >= 1");

  auto p_hat = [&](const StepFunction& f) {
    StepFunction out = push_density(m0, hadamard(f, h));
    for (std::size_t i = 0; i < n; ++i) out[i] /= h[i];
    return out;
  };

  GreenKubo gk;
  gk.removed_mean = inner(phi, h);
  StepFunction term = phi;
  term += -gk.removed_mean;
  const double phi_bv = term.bv();
  StepFunction g = term;
  const double cap = gamma > 0.0 ? 10.0 * std::log(1.0 / tail_tol) / std::log(1.0 / gamma) : 1.0;
  std::int64_t k = 0;
  double bound = c1 * phi_bv * gamma / (1.0 - gamma);
  while (bound >= tail_tol && term.sup() > 0.0) {
    if (static_cast<double>(k + 1) > cap) {
      throw NonConvergentTail("Green-Kubo series did not reach tail " + std::to_string(tail_tol) + " within " +
                              std::to_string(static_cast<std::int64_t>(cap)) + " terms");
    }
    term = p_hat(term);
    g += term;
    ++k;
    bound = c1 * phi_bv * std::pow(gamma, static_cast<double>(k + 1)) / (1.0 - gamma);
  }
  gk.terms = k;
  gk.tail_bound = bound;
  StepFunction diff = g - pull_function(m0, p_hat(g));
  gk.sigma2 = inner(p_hat(hadamard(diff, diff)), h);
  return gk;
}

GreenKubo green_kubo_variance(const UlamMatrix& m0, const StepFunction& h, const Observable& phi, double tail_tol,
                              const HypothesisReport* exa) {
  return green_kubo_variance(m0, h, phi.to_grid(m0.size()), tail_tol, exa);
}

ShrinkingTargetResult shrinking_target(const SequentialSystem& system, const ShrinkingTargetSpec& spec) {
  if (!system.stationary()) throw InvalidArgument("shrinking targets need a frozen schedule");
  if (spec.n_max < 1 || spec.samples == 0) throw InvalidArgument("n_max and M must be positive");
  ShrinkingTargetResult out;
  out.warning = spec.targets.warning();
  const IntervalMap map = system.limit_map();
  const auto m0 = build_ulam(map, spec.cells);
  const StepFunction h = invariant_density(m0).density;
  const std::size_t cells = h.size();
  std::vector<double> cum(cells + 1, 0.0);
  for (std::size_t i = 0; i < cells; ++i) cum[i + 1] = cum[i] + h[i] / static_cast<double>(cells);
  auto mass_below = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return cum[cells];
    const double pos = x * static_cast<double>(cells);
    const auto i = std::min(static_cast<std::size_t>(pos), cells - 1);
    return cum[i] + (pos - static_cast<double>(i)) / static_cast<double>(cells) * h[i];
  };

  EnsembleResult& r = out.hits;
  r.checkpoints = spec.checkpoints.empty() ? geometric_checkpoints(64, spec.n_max) : spec.checkpoints;
  check_checkpoints(r.checkpoints, spec.n_max);
  r.samples = spec.samples;
  r.seed = spec.seed;
  r.descriptor = {{"system", system.to_json()}, {"targets", spec.targets.to_json()}, {"initial", "invariant"}};
  const std::size_t nc = r.checkpoints.size();

  std::vector<double> right(static_cast<std::size_t>(spec.n_max) + 1, 0.0);
  const double anchor = spec.targets.anchor;
  double e = 0.0;
  std::size_t c = 0;
  for (std::int64_t j = 1; j <= spec.n_max; ++j) {
    right[static_cast<std::size_t>(j)] = spec.targets.length(j) > 0.0 ? spec.targets.right(j) : anchor;
    e += mass_below(right[static_cast<std::size_t>(j)]) - mass_below(anchor);
    if (c < nc && r.checkpoints[c] == j) {
      out.expected.push_back(e);
      ++c;
    }
  }

  const bool uniform = h == StepFunction(cells, 1.0);
  std::optional<DensitySampler> sampler;
  if (!uniform) sampler.emplace(h);
  const MapStepper stepper(map);
  r.sums.assign(spec.samples * nc, 0.0);
  const auto m = static_cast<std::int64_t>(spec.samples);
  const std::int64_t n_max = spec.n_max;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < m; ++i) {
    Stream rng(spec.seed, static_cast<std::uint64_t>(i));
    OrbitWalker w;
    if (sampler) {
      w.start_at((*sampler)(rng));
    } else {
      w.start_uniform(rng);
    }
    std::int64_t hits = 0;
    std::size_t cc = 0;
    double* dst = &r.sums[static_cast<std::size_t>(i) * nc];
    for (std::int64_t j = 1; j <= n_max; ++j) {
      const double y = w.step(stepper, rng);
      hits += (y >= anchor && y < right[static_cast<std::size_t>(j)]) ? 1 : 0;
      if (r.checkpoints[cc] == j) {
        dst[cc] = static_cast<double>(hits);
        if (++cc == nc) break;
      }
    }
  }
  for (std::size_t k = 0; k < nc; ++k) out.mean_hits.push_back(sample_mean(r.column(k)));
  if (sample_variance(r.column(nc - 1)) == 0.0) return out;
  out.variance = variance_curve(r, spec.bootstrap, spec.seed);
  CltOptions co;
  co.center = out.expected.back();
  co.jitter = spec.jitter;
  co.seed = spec.seed;
  out.clt = clt_test(r.column(nc - 1), r.checkpoints.back(), co);
  return out;
}

}  // namespace seqasip
