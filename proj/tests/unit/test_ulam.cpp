#include <cmath>
#include <random>

#include "doctest.h"
#include "seqasip/errors.hpp"
#include "seqasip/kernels.hpp"
#include "seqasip/ulam.hpp"

using namespace seqasip;

namespace {

StepFunction random_step(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StepFunction f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = u(rng);
  return f;
}

}  // namespace

TEST_CASE("doubling map on four cells is exact") {
  const auto m = build_ulam(IntervalMap::linear_noise(2, 0.0), 4);
  const std::vector<double> expected{0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5};
  CHECK(m.dense() == expected);
}

TEST_CASE("push_density small cases") {
  const auto m = build_ulam(IntervalMap::linear_noise(2, 0.0), 4);
  CHECK(push_density(m, StepFunction(std::vector<double>{4, 0, 0, 0})) == StepFunction(std::vector<double>{2, 2, 0, 0}));
  CHECK(push_density(m, StepFunction(4, 1.0)) == StepFunction(4, 1.0));
  CHECK(push_density(m, StepFunction(4, 0.0)) == StepFunction(4, 0.0));
  CHECK_THROWS_AS(push_density(m, StepFunction(8, 1.0)), DimensionMismatch);
}

TEST_CASE("rows are stochastic, mass is preserved, duality holds") {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<IntervalMap> maps{IntervalMap::beta(golden), IntervalMap::beta(2.3), IntervalMap::linear_noise(3, 0.217),
                                IntervalMap::piecewise_c2({{0.0, {0.0, 1.6, 0.8, 0.0}}, {0.5, {-1.0, 2.0, 0.0, 0.0}}}, 0.0)};
  std::mt19937_64 rng(11);
  for (const auto& map : maps) {
    const auto m = build_ulam(map, 512);
    for (std::size_t i = 0; i < m.size(); ++i) REQUIRE(std::abs(m.row_sum(i) - 1.0) <= 1e-12);
    for (double v : m.vals()) REQUIRE(v >= 0.0);
    for (int t = 0; t < 100; ++t) {
      const auto f = random_step(512, rng);
      const auto g = random_step(512, rng);
      REQUIRE(std::abs(push_density(m, f).integral() - f.integral()) <= 1e-12);
      REQUIRE(std::abs(inner(push_density(m, f), g) - inner(f, pull_function(m, g))) <= 1e-12);
    }
  }
}

TEST_CASE("serial and OpenMP kernels agree bitwise") {
  const auto map = IntervalMap::beta(1.77);
  const std::size_t n = 8192;
  const auto rows_s = kernels::serial::ulam_rows(map, n);
  const auto rows_p = kernels::omp::ulam_rows(map, n);
  REQUIRE(rows_s.size() == rows_p.size());
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(rows_s[i].size() == rows_p[i].size());
    for (std::size_t k = 0; k < rows_s[i].size(); ++k) {
      REQUIRE(rows_s[i][k].col == rows_p[i][k].col);
      REQUIRE(rows_s[i][k].value == rows_p[i][k].value);
    }
  }
  const auto m = build_ulam(map, n);
  std::mt19937_64 rng(5);
  const auto f = random_step(n, rng);
  std::vector<double> a(n), b(n);
  kernels::serial::push(m, f.values(), a);
  kernels::omp::push(m, f.values(), b);
  CHECK(a == b);
  kernels::serial::pull(m, f.values(), a);
  kernels::omp::pull(m, f.values(), b);
  CHECK(a == b);
}

TEST_CASE("invariant densities") {
  const auto d = invariant_density(build_ulam(IntervalMap::linear_noise(2, 0.0), 1024));
  CHECK(d.residual < 1e-12);
  CHECK(d.density == StepFunction(1024, 1.0));

  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const std::size_t n = 4096;
  const auto parry = invariant_density(build_ulam(IntervalMap::beta(golden), n)).density;
  const double hi = golden / (3.0 - golden);
  const double lo = 1.0 / (3.0 - golden);
  const auto jump = static_cast<std::size_t>(std::floor(n / golden));
  double l1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == jump) continue;
    l1 += std::abs(parry[i] - (i < jump ? hi : lo)) / static_cast<double>(n);
  }
  // Ulam converges in L1; pointwise it keeps an O(1) layer along the orbit of the discontinuity.
  CHECK(l1 <= 1e-3);
}

TEST_CASE("a reducible matrix has no unique invariant density") {
  // Two copies of the doubling map on [0,1/2) and [1/2,1) that never mix.
  const std::size_t n = 8;
  std::vector<UlamMatrix::Triplet> t;
  for (std::uint32_t half = 0; half < 2; ++half) {
    for (std::uint32_t i = 0; i < 4; ++i) {
      t.push_back({half * 4 + i, half * 4 + (2 * i) % 4, 0.5});
      t.push_back({half * 4 + i, half * 4 + (2 * i + 1) % 4, 0.5});
    }
  }
  const UlamMatrix m(n, t, "glued");
  CHECK_THROWS_AS(invariant_density(m), NonConvergence);

  std::vector<UlamMatrix::Triplet> swap;
  for (std::uint32_t i = 0; i < 8; ++i) swap.push_back({i, (i + 4) % 8, 1.0});
  CHECK_THROWS_AS(invariant_density(UlamMatrix(n, swap, "swap"), 1e-13, 2000), NonConvergence);
}

TEST_CASE("checksum tracks content") {
  const auto a = build_ulam(IntervalMap::beta(1.9), 256);
  const auto b = build_ulam(IntervalMap::beta(1.9), 256);
  const auto c = build_ulam(IntervalMap::beta(1.91), 256);
  CHECK(a.checksum() == b.checksum());
  CHECK(a.checksum() != c.checksum());
  CHECK(a == b);
}
