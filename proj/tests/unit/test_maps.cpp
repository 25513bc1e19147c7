#include <cmath>
#include <random>

#include "doctest.h"
#include "seqasip/errors.hpp"
#include "seqasip/maps.hpp"

using namespace seqasip;

namespace {
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;
}

TEST_CASE("eval_map on linear and beta maps") {
  CHECK(eval_map(IntervalMap::linear_noise(2, 0.0), 0.3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(eval_map(IntervalMap::beta(1.5), 0.8) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(eval_map(IntervalMap::linear_noise(2, 0.1), 0.3) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("branch inverses") {
  auto inv = branch_inverses(IntervalMap::linear_noise(2, 0.0), 0.5);
  REQUIRE(inv.size() == 2);
  CHECK(inv[0].x == doctest::Approx(0.25));
  CHECK(inv[1].x == doctest::Approx(0.75));
  CHECK(inv[0].deriv == 2.0);

  inv = branch_inverses(IntervalMap::beta(kGolden), 0.5);
  REQUIRE(inv.size() == 2);
  CHECK(inv[0].x == doctest::Approx(0.5 / kGolden).epsilon(1e-14));
  CHECK(inv[1].x == doctest::Approx(1.5 / kGolden).epsilon(1e-14));
  CHECK(inv[1].deriv == doctest::Approx(kGolden));

  inv = branch_inverses(IntervalMap::beta(1.2), 0.9);
  REQUIRE(inv.size() == 1);
  CHECK(inv[0].x == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("inverses round-trip for every catalog kind") {
  std::vector<IntervalMap> maps{IntervalMap::beta(kGolden), IntervalMap::beta(2.7), IntervalMap::linear_noise(3, -0.37),
                                IntervalMap::linear_noise(2, 0.01),
                                IntervalMap::piecewise_c2({{0.0, {0.0, 1.6, 0.8, 0.0}}, {0.5, {-1.0, 2.0, 0.0, 0.0}}}, 0.0)};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : maps) {
    const double lam = m.expansion();
    for (int t = 0; t < 100000; ++t) {
      const double y = u(rng);
      for (const auto& p : branch_inverses(m, y)) {
        REQUIRE(std::abs(eval_map(m, p.x) - y) <= 1e-12 * lam);
      }
    }
  }
}

TEST_CASE("linear maps have a full set of preimages") {
  const auto m = IntervalMap::linear_noise(3, 0.42);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) REQUIRE(branch_inverses(m, u(rng)).size() == 3);
}

TEST_CASE("factory validation") {
  CHECK_THROWS_AS(IntervalMap::beta(0.9), InvalidArgument);
  CHECK_THROWS_WITH(IntervalMap::beta(0.9), doctest::Contains("beta must exceed 1"));
  CHECK_THROWS_AS(IntervalMap::linear_noise(1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(IntervalMap::linear_noise(2, 1.5), InvalidArgument);
  // contracting branch
  CHECK_THROWS_AS(IntervalMap::piecewise_c2({{0.0, {0.0, 0.9, 0.0, 0.0}}}, 0.0), InvalidArgument);
}

TEST_CASE("noise sign rule moves a branch only when its image stays inside") {
  // branch 0 image [0, 0.95): +eps fits; branch 1 image [0, 1): no sign fits, so it stays put
  const auto m = IntervalMap::piecewise_c2({{0.0, {0.0, 1.9, 0.0, 0.0}}, {0.5, {-1.0, 2.0, 0.0, 0.0}}}, 0.03);
  CHECK(m.branch_shifts()[0] == doctest::Approx(0.03));
  CHECK(m.branch_shifts()[1] == 0.0);
}

TEST_CASE("sequential orbits") {
  SequentialSystem doubling(IntervalMap::linear_noise(2, 0.0), ParameterSchedule::frozen(0.0), 10);
  const auto orb = sequential_orbit(doubling, 0.1, 3);
  REQUIRE(orb.size() == 3);
  CHECK(orb[0] == doctest::Approx(0.2));
  CHECK(orb[1] == doctest::Approx(0.4));
  CHECK(orb[2] == doctest::Approx(0.8));
  CHECK(sequential_orbit(doubling, 0.1, 0).empty());

  SequentialSystem betas(IntervalMap::beta(2.5), ParameterSchedule::additive(2.0, 1.0, 0.6), 1000);
  const auto two = sequential_orbit(betas, 0.5, 2);
  const double y1 = eval_map(IntervalMap::beta(3.0), 0.5);
  const double y2 = eval_map(IntervalMap::beta(2.0 + std::pow(2.0, -0.6)), y1);
  CHECK(two[0] == y1);
  CHECK(two[1] == y2);

  for (double v : sequential_orbit(betas, 0.123, 500)) {
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("parameter schedules") {
  const auto s = ParameterSchedule::additive(0.0, 0.1, 0.6);
  CHECK(schedule_param(s, 1) == doctest::Approx(0.1));
  CHECK(schedule_param(s, 8) == doctest::Approx(0.028717).epsilon(1e-5));
  CHECK(schedule_param(ParameterSchedule::frozen(1.7), 12345) == 1.7);
  for (int k = 1; k < 100; ++k) CHECK(s.param(k + 1) < s.param(k));
  CHECK(ParameterSchedule::additive(0.0, 0.1, 0.4).slow_decay_warning());
}

TEST_CASE("descriptors round-trip through JSON") {
  const SequentialSystem sys(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), 100);
  const auto back = SequentialSystem::from_json(sys.to_json(), 100);
  CHECK(back.to_json() == sys.to_json());
  const auto c2 = IntervalMap::piecewise_c2({{0.0, {0.0, 1.6, 0.8, 0.0}}, {0.5, {-1.0, 2.0, 0.0, 0.0}}}, 0.0);
  CHECK(IntervalMap::from_json(c2.to_json()).descriptor() == c2.descriptor());
  Json bad = sys.to_json();
  bad["colour"] = 1;
  CHECK_THROWS_AS(SequentialSystem::from_json(bad, 10), InvalidArgument);
}

TEST_CASE("observables") {
  const auto c = Observable::trig(1.0);
  CHECK(c(0.0) == doctest::Approx(1.0));
  CHECK(c.to_grid(64).integral() == doctest::Approx(0.0).epsilon(1e-15));
  const auto ind = Observable::indicator(0.0, 0.5);
  const auto g = ind.to_grid(4);
  CHECK(g[0] == 1.0);
  CHECK(g[3] == 0.0);
  CHECK(Observable::indicator(0.0, 0.5, true).to_grid(4).integral() == doctest::Approx(0.0));
  CHECK(Observable::zero().is_zero());
}

TEST_CASE("target sequences are nested") {
  TargetSequence t{0.5, 1.0, 0.0};
  for (int j = 1; j < 1000; ++j) CHECK(t.right(j + 1) <= t.right(j));
  TargetSequence empty{0.5, 0.0, 0.0};
  CHECK_FALSE(empty.contains(3, 0.0));
}
