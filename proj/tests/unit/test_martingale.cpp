#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "seqasip/errors.hpp"
#include "seqasip/martingale.hpp"

using namespace seqasip;

namespace {

std::vector<double> orbit_from(const SequentialSystem& sys, double x, std::int64_t n) {
  std::vector<double> o{x};
  const auto rest = sequential_orbit(sys, x, n);
  o.insert(o.end(), rest.begin(), rest.end());
  return o;
}

SequentialSystem doubling(std::int64_t horizon = 1 << 16) {
  return SequentialSystem(IntervalMap::linear_noise(2, 0.0), ParameterSchedule::frozen(0.0), horizon);
}

SequentialSystem beta_schedule(std::int64_t horizon = 1000) {
  return SequentialSystem(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), horizon);
}

ChainState stationary_doubling(std::size_t cells) {
  ChainOptions o;
  o.initial = StepFunction(cells, 1.0);
  return ChainState(doubling(), cells, o);
}

DecompositionOptions stationary() {
  DecompositionOptions o;
  o.mode = DecompositionMode::Stationary;
  return o;
}

const auto kCos = ObservableSequence::constant(Observable::trig(1.0));
const auto kSaw = ObservableSequence::constant(Observable::sawtooth());

double l1_gap(const StepFunction& a, const StepFunction& b) { return (a - b).l1(); }

}  // namespace

TEST_CASE("q_apply") {
  SUBCASE("fixes constants") {
    ChainState s(beta_schedule(), 512);
    for (int k = 1; k <= 5; ++k) {
      const auto q = q_apply(s, k, StepFunction(512, 1.0), 1e-3);
      for (std::size_t i = 0; i < 512; ++i) CHECK(q[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("kills cos under doubling") {
    auto s = stationary_doubling(4096);
    CHECK(q_apply(s, 1, Observable::trig(1.0).to_grid(4096), 1e-3).sup() <= 1e-3);
  }
  SUBCASE("left inverse of composition, improving with N") {
    double prev = INFINITY;
    for (std::size_t n : {512, 1024, 2048}) {
      ChainState s(beta_schedule(), n);
      const auto g = Observable::sawtooth().to_grid(n);
      const auto gt = pull_function(*s.matrix(3), g);
      const double err = l1_gap(q_apply(s, 3, gt, 1e-3), g);
      CHECK(err < prev);
      CHECK(err <= 1e-2);
      prev = err;
    }
  }
  SUBCASE("small denominators") {
    const auto bad = IntervalMap::piecewise_c2({{0.0, {0.0, 1.9, 0.0, 0.0}}, {0.5, {-0.9, 1.9, 0.0, 0.0}}}, 0.0);
    ChainState s(SequentialSystem(bad, ParameterSchedule::frozen(0.0), 100), 256);
    CHECK_THROWS_AS(q_apply(s, 30, StepFunction(256, 1.0), 1e-3), DenominatorTooSmall);
  }
}

TEST_CASE("zero observables give a zero decomposition") {
  ChainState s(beta_schedule(), 256);
  const auto zero = ObservableSequence::constant(Observable::zero());
  const auto dec = build_decomposition(s, zero, 20);
  for (std::int64_t k = 1; k <= 20; ++k) {
    CHECK(dec.h_at(k).sup() == 0.0);
    CHECK(dec.psi_at(k).sup() == 0.0);
  }
  for (double r : check_reverse_martingale(dec, s, 5e-4)) CHECK(r == 0.0);
  CHECK(conditional_variance_function(dec, s, 3, 5e-4).g.sup() == 0.0);

  CmOptions o;
  o.samples = 8;
  const auto cm = cm_diagnostics(s, zero, DecompositionOptions{}, 64, o);
  for (double v : cm.trajectories) CHECK(v == 0.0);
  CHECK(cm.b_partial.back() == 0.0);
}

TEST_CASE("stationary doubling with cos") {
  auto s = stationary_doubling(4096);
  const auto dec = build_decomposition(s, kCos, 16, stationary());
  for (std::int64_t k = 1; k <= 16; ++k) {
    CHECK(dec.h_at(k).sup() <= 1e-3);
    CHECK(l1_gap(dec.psi_at(k), dec.phi_tilde[static_cast<std::size_t>(k)]) <= 1e-3);
  }
  const auto res = check_reverse_martingale(dec, s, 5e-4);
  CHECK(*std::max_element(res.begin(), res.end()) <= 1e-3);

  const auto cv = conditional_variance_function(dec, s, 4, 5e-4);
  double err = 0.0;
  for (std::size_t i = 0; i < 4096; ++i) {
    const double x = (i + 0.5) / 4096.0;
    err = std::max(err, std::abs(cv.g[i] - (0.5 + 0.5 * std::cos(2 * std::numbers::pi * x))));
  }
  CHECK(err <= 1e-3);
  CHECK(std::abs(inner(cv.g, s.density(5)) - cv.second_moment) <= 1e-10);
}

TEST_CASE("sequential beta schedule") {
  SUBCASE("tower property at every k") {
    ChainState s(beta_schedule(), 1024);
    const auto dec = build_decomposition(s, kSaw, 30);
    for (std::int64_t k = 1; k <= 30; ++k) {
      const auto cv = conditional_variance_function(dec, s, k, 5e-4);
      CHECK(std::abs(inner(cv.g, s.density(k + 1)) - cv.second_moment) <= 1e-10);
    }
  }
  SUBCASE("h stays bounded under refinement") {
    ChainState a(beta_schedule(), 1024);
    ChainState b(beta_schedule(), 2048);
    const auto da = build_decomposition(a, kSaw, 200);
    const auto db = build_decomposition(b, kSaw, 200);
    CHECK(std::isfinite(da.sup_h_bv));
    CHECK(std::abs(db.sup_h_bv - da.sup_h_bv) <= 0.1 * da.sup_h_bv);
    // boundedness constant relative to the observable's BV norm
    CHECK(da.sup_h_sup <= 10.0 * Observable::sawtooth().bv_bound());
  }
  SUBCASE("residuals shrink with N") {
    ChainState a(beta_schedule(), 1024);
    ChainState b(beta_schedule(), 2048);
    const auto ra = check_reverse_martingale(build_decomposition(a, kSaw, 20), a, 5e-4);
    const auto rb = check_reverse_martingale(build_decomposition(b, kSaw, 20), b, 5e-4);
    CHECK(*std::max_element(rb.begin(), rb.end()) < *std::max_element(ra.begin(), ra.end()));
  }
}

TEST_CASE("increments telescope along orbits") {
  const auto sys = beta_schedule();
  ChainState s(sys, 1024);
  const std::int64_t n = 40;
  const auto dec = build_decomposition(s, kSaw, n);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto orbit = orbit_from(sys, u(rng), n + 1);
    const auto inc = increments_along(dec, kSaw, orbit);
    double lhs = 0.0, phis = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) {
      lhs += inc[static_cast<std::size_t>(j)];
      phis += dec.phi_tilde[static_cast<std::size_t>(j)].at(orbit[static_cast<std::size_t>(j)]);
    }
    const double rhs = phis + dec.h_at(1).at(orbit[1]) - dec.h_at(n + 1).at(orbit[static_cast<std::size_t>(n + 1)]);
    CHECK(std::abs(lhs - rhs) <= n * 1e-10);
  }
}

TEST_CASE("increments are uncorrelated") {
  const auto sys = beta_schedule();
  ChainState s(sys, 4096);
  const std::int64_t n = 8;
  const auto dec = build_decomposition(s, kSaw, n);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int m = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < m; ++t) {
    const auto inc = increments_along(dec, kSaw, orbit_from(sys, u(rng), n + 1));
    const double p = inc[3] * inc[6];
    sum += p;
    sum2 += p * p;
  }
  const double mean = sum / m;
  const double se = std::sqrt((sum2 / m - mean * mean) / m);
  CHECK(std::abs(mean) <= 3 * se);
}

TEST_CASE("decompositions round-trip through the container") {
  ChainState s(beta_schedule(), 128);
  const auto dec = build_decomposition(s, kSaw, 12);
  const auto path = std::filesystem::temp_directory_path() / "seqasip-unit-dec.bin";
  save_decomposition(dec, path);
  const auto back = load_decomposition(path);
  CHECK(back.n_max == dec.n_max);
  CHECK(back.cells == dec.cells);
  for (std::int64_t k = 1; k <= 12; ++k) {
    CHECK(back.h_at(k) == dec.h_at(k));
    CHECK(back.psi_at(k) == dec.psi_at(k));
  }
  CHECK(back.h_at(13) == dec.h_at(13));
}

TEST_CASE("stationary mode needs an invariant start") {
  ChainState s(beta_schedule(), 256);
  CHECK_THROWS_AS(build_decomposition(s, kSaw, 4, stationary()), InvalidArgument);
}
