#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "seqasip/errors.hpp"
#include "seqasip/experiment.hpp"
#include "seqasip/report.hpp"

using namespace seqasip;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("seqasip-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Json small_clt(const fs::path& out) {
  return {{"experiment", "clt"}, {"n_max", 512}, {"M", 500}, {"seed", 3}, {"out", out.string()}};
}

}  // namespace

TEST_CASE("csv formatting") {
  CsvTable t{{"name", "value"}, {}};
  t.add({std::string("a,b"), 0.1});
  t.add({std::string("say \"hi\""), std::int64_t{7}});
  CHECK(to_csv(t) == "name,value\r\n\"a,b\",0.10000000000000001\r\n\"say \"\"hi\"\"\",7\r\n");
  CHECK_THROWS_AS(t.add({1.0}), DimensionMismatch);
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(resolve_config("clt", {{"bogus", 1}}), doctest::Contains("bogus"), InvalidArgument);
  CHECK_THROWS_WITH_AS(resolve_config("ulam", {{"system", {{"kind", "beta"}, {"parameters", {{"beta", 0.9}}}}}}),
                       doctest::Contains("beta must exceed 1"), InvalidArgument);
  CHECK_THROWS_WITH_AS(resolve_config("clt", {{"observable", {{"kind", "trig"}, {"freq", 1}}}}),
                       doctest::Contains("freq"), InvalidArgument);
  CHECK_THROWS_AS(resolve_config("clt", {{"N", 1.5}}), InvalidArgument);
  CHECK_THROWS_AS(resolve_config("nope", Json::object()), InvalidArgument);
  for (const auto& k : experiment_kinds()) CHECK(resolve_config(k, Json::object()).at("experiment") == k);

  Json c = Json::object();
  apply_assignment(c, "system.parameters.beta=1.9");
  apply_assignment(c, "out=some dir");
  apply_assignment(c, "M=10");
  CHECK(c["system"]["parameters"]["beta"] == 1.9);
  CHECK(c["out"] == "some dir");
  CHECK(c["M"] == 10);
  CHECK_THROWS_AS(apply_assignment(c, "novalue"), InvalidArgument);
}

TEST_CASE("clt run writes reports and a manifest") {
  const auto dir = scratch("run");
  const auto r1 = run_experiment(small_clt(dir / "a"));
  for (const char* f : {"clt.csv", "clt.json", "clt.gp", "manifest.json"}) CHECK(fs::exists(dir / "a" / f));
  const std::string csv = read_text(dir / "a" / "clt.csv");
  const auto r2 = run_experiment(small_clt(dir / "a"));
  CHECK(r1.pass);
  CHECK(read_text(dir / "a" / "clt.csv") == csv);
  CHECK(r1.manifest.at("files") == r2.manifest.at("files"));
  run_experiment(small_clt(dir / "b"));
  CHECK(read_text(dir / "b" / "clt.csv") == csv);
  const auto side = Json::parse(read_text(dir / "a" / "clt.json"));
  CHECK(side.at("seed") == 3);
  CHECK(side.contains("git_hash"));
  CHECK(side.at("config").at("M") == 500);
  const auto header = read_text(dir / "a" / "clt.csv").substr(0, 10);
  CHECK(header == "n,samples,");
}

TEST_CASE("failed hypothesis reports are flagged") {
  const auto dir = scratch("fail");
  Json cfg = {{"experiment", "verify-lb"},
              {"system", {{"kind", "piecewise_c2"},
                          {"parameters", {{"eps", 0.0},
                                          {"branches", Json::array({{{"left", 0.0}, {"coeffs", {0.0, 1.9, 0.0, 0.0}}},
                                                                    {{"left", 0.5}, {"coeffs", {-0.9, 1.9, 0.0, 0.0}}}})}}}}},
              {"family_parameters", {0.0}},
              {"N", 256},
              {"trials", 2},
              {"n_max", 30},
              {"out", (dir / "o").string()}};
  const auto r = run_experiment(cfg);
  CHECK_FALSE(r.pass);
  CHECK(fs::exists(dir / "o" / "verify-lb.csv"));
  CHECK(r.manifest.at("hypothesis_reports").at(0).at("pass") == false);
}

TEST_CASE("cache garbage collection") {
  const auto root = scratch("gc");
  const auto cache = root / "cache";
  SUBCASE("empty cache") {
    fs::create_directories(cache);
    CHECK(cache_gc(cache, 0).empty());
  }
  SUBCASE("least recently used first, pinned entries kept") {
    fs::create_directories(cache);
    const auto now = fs::file_time_type::clock::now();
    for (int i = 0; i < 3; ++i) {
      const auto p = cache / ("ulam-" + std::to_string(i) + ".bin");
      std::ofstream(p) << std::string(100, 'x');
      fs::last_write_time(p, now - std::chrono::hours(10 - i));
    }
    CHECK(cache_gc(cache, 250) == std::vector<std::string>{"ulam-0.bin"});
    write_text_atomic(root / "run" / "manifest.json", Json{{"cache_inputs", {{{"file", "ulam-2.bin"}}}}}.dump());
    CHECK(cache_gc(cache, 0) == std::vector<std::string>{"ulam-1.bin"});
    CHECK(fs::exists(cache / "ulam-2.bin"));
  }
  SUBCASE("cache reuse is recorded") {
    Json cfg = {{"experiment", "ulam"}, {"N", 256}, {"out", (root / "u1").string()}, {"cache", cache.string()}};
    const auto a = run_experiment(cfg);
    cfg["out"] = (root / "u2").string();
    const auto b = run_experiment(cfg);
    CHECK(a.manifest.at("cache_inputs") == b.manifest.at("cache_inputs"));
    CHECK(a.manifest.at("cache_inputs").size() == 1);
    CHECK(cache_gc(cache, 0).empty());
  }
}
