// Acceptance suite. Each criterion prints one line
//   criterion K: PASS|FAIL  <measured values>
// and writes criterion_K.csv (values only, no timings) to the output directory.
// Criterion 11 re-runs 1..10 under two thread counts and compares those files byte for byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqasip/hypothesis.hpp"
#include "seqasip/kernels.hpp"
#include "seqasip/martingale.hpp"
#include "seqasip/report.hpp"
#include "seqasip/stats.hpp"

using namespace seqasip;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  CsvTable csv{{"quantity", "value"}, {}};

  void record(const std::string& name, double v) {
    csv.add({name, v});
    detail << " " << name << "=" << format_double_short(v);
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
  static std::string format_double_short(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
  }
};

SequentialSystem doubling(std::int64_t horizon = 1 << 22) {
  return SequentialSystem(IntervalMap::linear_noise(2, 0.0), ParameterSchedule::frozen(0.0), horizon);
}

std::vector<IntervalMap> beta_family() {
  std::vector<IntervalMap> f;
  for (double b : {1.8, 1.9, 2.0, 2.1, 2.2}) f.push_back(IntervalMap::beta(b));
  return f;
}

// 1. exact Ulam matrix of the doubling map on four cells
void c1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = build_ulam(IntervalMap::linear_noise(2, 0.0), 4);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::vector<double> expected{0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5};
  const auto d = m.dense();
  double diff = 0.0;
  for (std::size_t i = 0; i < 16; ++i) diff = std::max(diff, std::abs(d[i] - expected[i]));
  o.record("max_abs_difference", diff);
  o.require(d == expected, "matrix equals the hand-computed rows exactly");
  o.require(secs < 1.0, "runtime < 1 s");
}

// 2. Parry density of the golden beta map
void c2(Outcome& o) {
  const std::size_t n = 4096;
  const auto h = invariant_density(build_ulam(IntervalMap::beta(kGolden), n)).density;
  const double jump = 1.0 / kGolden;
  const auto jump_cell = static_cast<std::size_t>(jump * n);
  double sup = 0.0, l1 = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / n, b = static_cast<double>(i + 1) / n;
    // cell average of the closed form
    const double lo = kGolden / (3 - kGolden), hi = 1.0 / (3 - kGolden);
    const double exact = b <= jump ? lo : a >= jump ? hi : ((jump - a) * lo + (b - jump) * hi) * n;
    const double e = std::abs(h[i] - exact);
    l1 += e / n;
    if (i != jump_cell && e > sup) {
      sup = e;
      worst = i;
    }
  }
  o.record("sup_error_excluding_jump_cell", sup);
  o.record("worst_cell", static_cast<double>(worst));
  o.record("l1_error", l1);
  o.require(sup <= 5e-3, "sup error <= 5e-3 away from the discontinuity cell");
}

// 3. Green-Kubo on the doubling map
void c3(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 4096;
  const auto m = build_ulam(IntervalMap::linear_noise(2, 0.0), n);
  const StepFunction h(n, 1.0);
  const double cos_var = green_kubo_variance(m, h, Observable::trig(1.0), 1e-10).sigma2;
  const auto g = Observable::sawtooth().to_grid(n);
  const double cob = green_kubo_variance(m, h, g - pull_function(m, g), 1e-10).sigma2;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.record("sigma2_cos", cos_var);
  o.record("sigma2_coboundary", cob);
  o.require(std::abs(cos_var - 0.5) <= 1e-3, "cos: 0.500 +- 1e-3");
  o.require(cob <= 1e-3, "coboundary <= 1e-3");
  o.require(secs < 5.0, "runtime < 5 s");
}

// 4. Green-Kubo against Monte Carlo for the golden beta map
void c4(Outcome& o) {
  const std::size_t cells = 4096;
  const std::int64_t n = 1 << 14;
  const std::size_t m = 100000;
  const auto map = IntervalMap::beta(kGolden);
  const auto mat = build_ulam(map, cells);
  const auto h = invariant_density(mat).density;
  const auto phi = Observable::indicator(0.0, 0.5);
  const auto gk = green_kubo_variance(mat, h, phi, 1e-10);
  EnsembleSpec spec;
  spec.n_max = n;
  spec.samples = m;
  spec.seed = kSeed;
  spec.checkpoints = {n};
  spec.initial_density = h;
  const SequentialSystem sys(map, ParameterSchedule::frozen(kGolden), n + 1);
  const auto ens = ensemble_birkhoff(sys, ObservableSequence::constant(phi),
                                     std::vector<double>(static_cast<std::size_t>(n), gk.removed_mean), spec);
  const auto col = ens.column(0);
  const double var = sample_variance(col), mean = sample_mean(col);
  double m4 = 0.0;
  for (double x : col) m4 += std::pow(x - mean, 4);
  m4 /= static_cast<double>(m);
  const double md = static_cast<double>(m);
  const double se = std::sqrt((m4 - (md - 3) / (md - 1) * var * var) / md) / static_cast<double>(n);
  const double mc = var / static_cast<double>(n);
  o.record("sigma2_green_kubo", gk.sigma2);
  o.record("sigma2_monte_carlo", mc);
  o.record("monte_carlo_se", se);
  o.record("abs_difference", std::abs(gk.sigma2 - mc));
  o.require(std::abs(gk.sigma2 - mc) <= std::max(0.05 * gk.sigma2, 3 * se), "|GK - MC| <= max(5%, 3 SE)");
}

// 5. hypothesis suite on the beta family
void c5(Outcome& o) {
  DflyOptions d;
  d.cells = 1024;
  d.n_max = 40;
  d.trials = 20;
  d.seed = kSeed;
  const auto dfly = verify_dfly(beta_family(), d);
  LbOptions l;
  l.cells = 1024;
  l.n_max = 40;
  l.trials = 20;
  l.seed = kSeed;
  const auto lb1 = verify_lb(beta_family(), l);
  l.cells = 2048;
  const auto lb2 = verify_lb(beta_family(), l);
  const auto lip = verify_lip(IntervalMap::beta(2.0), 4096, {1e-4, 1e-3, 1e-2, 1e-1});
  o.record("dfly_rho", dfly.constant("rho"));
  o.record("dfly_A", dfly.constant("A"));
  o.record("dfly_B", dfly.constant("B"));
  o.record("lb_delta_1024", lb1.constant("delta"));
  o.record("lb_delta_2048", lb2.constant("delta"));
  o.record("lip_slope", lip.constant("slope"));
  o.record("lip_r2", lip.constant("r2"));
  const double d1 = lb1.constant("delta");
  o.require(dfly.constant("rho") < 1.0, "DFLY rho < 1");
  o.require(d1 >= 1e-3, "LB delta >= 1e-3");
  o.require(std::abs(lb2.constant("delta") - d1) <= 0.2 * d1, "LB stable within 20% from N=1024 to 2048");
  o.require(lip.constant("r2") >= 0.95, "LIP R^2 >= 0.95");
}

// 6. martingale residuals, tower property and conditional variance
void c6(Outcome& o) {
  const std::int64_t n = 64;
  const auto obs = ObservableSequence::constant(Observable::trig(1.0));
  DecompositionOptions dopt;
  dopt.mode = DecompositionMode::Stationary;
  auto run = [&](std::size_t cells, double& tower, double& cond) {
    ChainOptions co;
    co.initial = StepFunction(cells, 1.0);
    ChainState s(doubling(n + 2), cells, co);
    const auto dec = build_decomposition(s, obs, n, dopt);
    const auto res = check_reverse_martingale(dec, s, dopt.delta_min);
    tower = 0.0;
    cond = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
      const auto cv = conditional_variance_function(dec, s, k, dopt.delta_min);
      tower = std::max(tower, std::abs(inner(cv.g, s.density(k + 1)) - cv.second_moment));
      for (std::size_t i = 0; i < cells; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
        cond = std::max(cond, std::abs(cv.g[i] - (0.5 + 0.5 * std::cos(2 * std::numbers::pi * x))));
      }
    }
    return *std::max_element(res.begin(), res.end());
  };
  double tower1, cond1, tower2, cond2;
  const double r1 = run(4096, tower1, cond1);
  const double r2 = run(8192, tower2, cond2);
  o.record("max_residual_4096", r1);
  o.record("max_residual_8192", r2);
  o.record("tower_error", tower1);
  o.record("conditional_variance_sup_error", cond1);
  o.require(r1 <= 1e-3, "max residual <= 1e-3");
  // both at the rounding floor counts as converged
  o.require(r2 < r1 || (r1 <= 1e-14 && r2 <= 1e-14), "residual decreases when N doubles");
  o.require(tower1 <= 1e-10, "tower property to 1e-10");
  o.require(cond1 <= 1e-3, "conditional variance sup error <= 1e-3");
}

// 7. sequential self-norming CLT and null calibration
void c7(Outcome& o) {
  const std::int64_t n = 1 << 13;
  const SequentialSystem sys(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), n + 1);
  const auto obs = ObservableSequence::constant(Observable::sawtooth());
  const auto c = sequential_centering(sys, obs, n, 4096);
  EnsembleSpec spec;
  spec.n_max = n;
  spec.samples = 20000;
  spec.seed = kSeed;
  spec.checkpoints = geometric_checkpoints(64, n);
  const auto r = clt_test(ensemble_birkhoff(sys, obs, c, spec), n);
  int rejections = 0;
  for (std::uint64_t s = 1; s <= 200; ++s) {
    EnsembleSpec g;
    g.n_max = 1;
    g.samples = 1000;
    g.seed = kSeed + s;
    rejections += clt_test(ensemble_gaussian(g), 1).p_value <= 0.01 ? 1 : 0;
  }
  o.record("ks_statistic", r.ks_statistic);
  o.record("p_value", r.p_value);
  o.record("null_rejections_of_200", rejections);
  o.require(r.p_value > 0.01, "KS p > 0.01");
  o.require(rejections <= 5, "null rejection frequency <= 2.5%");
}

// 8. shrinking targets for the doubling map
void c8(Outcome& o) {
  ShrinkingTargetSpec s;
  s.targets.gamma = 0.5;
  s.n_max = 1 << 16;
  s.samples = 100000;
  s.seed = kSeed;
  const auto r = shrinking_target(doubling(), s);
  const double oracle = 2.0 * std::sqrt(static_cast<double>(s.n_max)) - 1.4603545088095868;
  const double rel = std::abs(r.mean_hits.back() - oracle) / oracle;
  o.record("mean_hits", r.mean_hits.back());
  o.record("expected_hits", r.expected.back());
  o.record("oracle", oracle);
  o.record("relative_error", rel);
  o.require(rel <= 0.02, "E_n within 2% of the partial-sum oracle");
  if (!r.variance || !r.clt) {
    o.require(false, "hit counts have positive variance");
    return;
  }
  o.record("variance_exponent", r.variance->exponent);
  o.record("ks_p_value", r.clt->p_value);
  o.record("skewness", r.clt->skewness);
  o.require(r.variance->exponent >= 0.4 && r.variance->exponent <= 0.6, "variance exponent in [0.4, 0.6]");
  o.require(r.clt->p_value > 0.01, "KS p > 0.01");
}

// 9. Conditions (A) and (B)
void c9(Outcome& o) {
  const std::int64_t n = 1 << 14;
  const std::size_t cells = 4096;
  ChainOptions co;
  co.initial = StepFunction(cells, 1.0);
  co.keep_history = false;
  ChainState s(doubling(n + 2), cells, co);
  DecompositionOptions dopt;
  dopt.mode = DecompositionMode::Stationary;
  CmOptions cm;
  cm.a_exponent = 0.75;
  cm.samples = 64;
  cm.seed = kSeed;
  const auto d = cm_diagnostics(s, ObservableSequence::constant(Observable::trig(1.0)), dopt, n, cm);
  const std::size_t nc = d.checkpoints.size();
  bool decreasing = true;
  for (std::size_t c = nc - 3; c < nc; ++c) {
    o.record("median_ratio_n" + std::to_string(d.checkpoints[c - 1]), d.median_ratio[c - 1]);
    decreasing = decreasing && d.median_ratio[c] < d.median_ratio[c - 1];
  }
  o.record("median_ratio_n" + std::to_string(d.checkpoints[nc - 1]), d.median_ratio[nc - 1]);
  bool halving = true;
  double prev = INFINITY;
  for (std::int64_t lo = 1; lo * 10 <= n; lo *= 10) {
    const double inc = d.b_running[static_cast<std::size_t>(lo * 10 - 1)] - d.b_running[static_cast<std::size_t>(lo - 1)];
    o.record("b_increment_" + std::to_string(lo) + "_" + std::to_string(lo * 10), inc);
    halving = halving && inc >= 0.0 && inc <= prev / 2;
    prev = inc;
  }
  o.require(decreasing, "median |S_n|/a_n strictly decreasing over the last 4 checkpoints");
  o.require(halving, "B increments shrink by >= 2x per decade");
}

// 10. LIL band against the i.i.d. Gaussian oracle
void c10(Outcome& o) {
  EnsembleSpec spec;
  spec.n_max = 1 << 20;
  spec.samples = 1000;
  spec.seed = kSeed;
  spec.checkpoints = geometric_checkpoints(64, spec.n_max, 4);
  const auto iid = lil_profile(ensemble_gaussian(spec), 10);
  const auto dbl = lil_profile(ensemble_birkhoff(doubling(), ObservableSequence::constant(Observable::trig(1.0)), {}, spec), 10);
  o.record("iid_median", iid.median);
  o.record("iid_q05", iid.q05);
  o.record("iid_q95", iid.q95);
  o.record("doubling_median", dbl.median);
  o.record("difference", dbl.median - iid.median);
  o.require(iid.median >= 0.6 && iid.median <= 1.2, "oracle median in [0.6, 1.2]");
  o.require(std::abs(dbl.median - iid.median) <= 0.15, "doubling median within oracle +- 0.15");
}

const std::vector<std::pair<double, std::function<void(Outcome&)>>> kCriteria = {
    {1, c1}, {5, c2}, {5, c3}, {180, c4}, {300, c5}, {60, c6}, {600, c7}, {600, c8}, {300, c9}, {900, c10}};

bool run_one(int k, const fs::path& out, bool quiet) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    kCriteria[static_cast<std::size_t>(k - 1)].second(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [error: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double budget = kCriteria[static_cast<std::size_t>(k - 1)].first;
  o.require(secs <= budget, "runtime budget " + Outcome::format_double_short(budget) + " s");
  write_text_atomic(out / ("criterion_" + std::to_string(k) + ".csv"), to_csv(o.csv));
  if (!quiet) {
    std::printf("criterion %d: %s %s (%.1f s)\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return o.pass;
}

// 11. byte-identical CSVs under different thread counts
bool run_reproducibility(const fs::path& out) {
  const int saved = kernels::max_threads();
  std::vector<int> counts{1, std::max(3, saved)};
  bool same = true;
  std::ostringstream detail;
  for (int k = 1; k <= 10; ++k) {
    std::vector<std::string> texts;
    for (int t : counts) {
      kernels::set_threads(t);
      const fs::path dir = out / ("threads-" + std::to_string(t));
      run_one(k, dir, true);
      texts.push_back(read_text(dir / ("criterion_" + std::to_string(k) + ".csv")));
    }
    const bool eq = texts[0] == texts[1];
    same = same && eq;
    detail << " c" << k << "=" << (eq ? "same" : "DIFFERENT");
  }
  kernels::set_threads(saved);
  std::printf("criterion 11: %s  threads %d vs %d:%s\n", same ? "PASS" : "FAIL", counts[0], counts[1], detail.str().c_str());
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  std::string out = "acceptance_out";
  int threads = 0;
  app.add_option("--criterion,-c", which, "criteria to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("--out", out, "directory for the per-criterion CSV files");
  app.add_option("--threads", threads, "OpenMP threads");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) kernels::set_threads(threads);
  if (which.empty()) {
    for (int k = 1; k <= 11; ++k) which.push_back(k);
  }
  bool all = true;
  for (int k : which) all = (k == 11 ? run_reproducibility(out) : run_one(k, out, false)) && all;
  return all ? 0 : 1;
}
