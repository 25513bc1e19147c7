#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "seqasip/chain.hpp"
#include "seqasip/container.hpp"
#include "seqasip/errors.hpp"

using namespace seqasip;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("seqasip-unit-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void flip_last_byte(const fs::path& p) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(-1, std::ios::end);
  char c;
  f.get(c);
  f.seekp(-1, std::ios::end);
  f.put(static_cast<char>(c ^ 0x5a));
}

}  // namespace

TEST_CASE("matrix files reload bit-exactly") {
  const auto dir = scratch("container");
  const auto m = build_ulam(IntervalMap::beta((1.0 + std::sqrt(5.0)) / 2.0), 777);
  save_matrix(m, dir / "m.bin");
  const auto back = load_matrix(dir / "m.bin");
  CHECK(back == m);
  CHECK(back.checksum() == m.checksum());
  CHECK(back.descriptor() == m.descriptor());

  const auto c = read_container(dir / "m.bin");
  CHECK(c.header.at("endianness") == "little");
  CHECK(c.header.at("version") == kContainerVersion);
  CHECK(c.header.at("N") == 777);
}

TEST_CASE("corrupted containers are rejected") {
  const auto dir = scratch("corrupt");
  save_matrix(build_ulam(IntervalMap::linear_noise(2, 0.0), 64), dir / "m.bin");
  flip_last_byte(dir / "m.bin");
  CHECK_THROWS_AS(load_matrix(dir / "m.bin"), CacheCorrupt);

  std::ofstream(dir / "junk.bin") << "not a header\n";
  CHECK_THROWS_AS(read_container(dir / "junk.bin"), CacheCorrupt);
  fs::resize_file(dir / "m.bin", 40);
  CHECK_THROWS_AS(read_container(dir / "m.bin"), CacheCorrupt);
}

TEST_CASE("matrix cache hits, misses and repairs") {
  const auto dir = scratch("cache");
  const auto map = IntervalMap::beta(1.77);
  MatrixCache cache(dir);
  const auto first = cache.get(map, 256);
  const auto again = cache.get(map, 256);
  CHECK(*first == *again);
  CHECK(cache.stats().misses == 1);
  CHECK(cache.stats().hits == 1);

  flip_last_byte(cache.path_for(map.descriptor(), 256));
  MatrixCache fresh(dir);
  const auto repaired = fresh.get(map, 256);
  CHECK(*repaired == *first);
  CHECK(fresh.stats().rebuilt_corrupt == 1);
  CHECK(load_matrix(fresh.path_for(map.descriptor(), 256)) == *first);
  REQUIRE(fresh.touched().size() == 1);
  CHECK(fresh.touched()[0].second == first->checksum());
}

TEST_CASE("compose_chain") {
  SUBCASE("doubling keeps Lebesgue") {
    ChainState s(SequentialSystem(IntervalMap::linear_noise(2, 0.0), ParameterSchedule::frozen(0.0), 100), 64);
    CHECK(compose_chain(s, 0) == StepFunction(64, 1.0));
    for (int n : {1, 5, 30}) CHECK(compose_chain(s, n) == StepFunction(64, 1.0));
  }
  SUBCASE("beta schedule stays positive with unit mass") {
    const SequentialSystem sys(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), 100);
    ChainState s(sys, 1024);
    for (int n = 1; n <= 20; ++n) {
      const auto d = compose_chain(s, n);
      CHECK(d.min() > 0.0);
      CHECK(std::abs(d.integral() - 1.0) <= n * 1e-12);
    }
  }
  SUBCASE("matches a direct dense product at N=128") {
    const SequentialSystem sys(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), 100);
    ChainState s(sys, 128);
    std::vector<double> v(128, 1.0);
    for (int k = 1; k <= 20; ++k) {
      const auto dense = build_ulam(sys.map_at(k), 128).dense();
      std::vector<double> w(128, 0.0);
      for (std::size_t i = 0; i < 128; ++i) {
        for (std::size_t j = 0; j < 128; ++j) w[j] += v[i] * dense[i * 128 + j];
      }
      v = w;
    }
    const auto d = compose_chain(s, 20);
    for (std::size_t j = 0; j < 128; ++j) CHECK(d[j] == doctest::Approx(v[j]).epsilon(1e-12));
  }
  SUBCASE("past the horizon") {
    ChainState s(SequentialSystem(IntervalMap::beta(2.0), ParameterSchedule::frozen(2.0), 5), 32);
    CHECK_THROWS_AS(compose_chain(s, 6), InvalidArgument);
  }
}

TEST_CASE("chain reuses the disk cache") {
  const auto dir = scratch("chain-cache");
  MatrixCache cache(dir);
  ChainOptions o;
  o.cache = &cache;
  const SequentialSystem sys(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), 100);
  ChainState a(sys, 128, o);
  const auto da = compose_chain(a, 6);
  ChainState b(sys, 128, o);
  CHECK(compose_chain(b, 6) == da);
  CHECK(cache.stats().hits >= 6);
}
