// Command-line front end: one subcommand per experiment kind plus cache-gc.
//
// Settings are layered file < environment < flags:
//   --config PATH          JSON config (keys as in `seqasip <kind> --print-config`)
//   SEQASIP_OUT, SEQASIP_SEED, SEQASIP_CACHE, SEQASIP_THREADS
//   --set K=V, --out, --seed, --cache, --threads
// Exit status: 0 success, 2 a hypothesis check failed (reports still written), 1 error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqasip/errors.hpp"
#include "seqasip/experiment.hpp"
#include "seqasip/kernels.hpp"
#include "seqasip/report.hpp"
#include "seqasip/version.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cache;
  bool print_config = false;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

int run(const std::string& kind, const Flags& f) {
  using seqasip::Json;
  Json cfg = Json::object();
  if (!f.config.empty()) {
    cfg = Json::parse(seqasip::read_text(f.config), nullptr, false);
    if (cfg.is_discarded()) throw seqasip::InvalidArgument("config file " + f.config + " is not valid JSON");
  }
  int threads = 0;
  if (auto v = env("SEQASIP_OUT")) cfg["out"] = *v;
  if (auto v = env("SEQASIP_CACHE")) cfg["cache"] = *v;
  if (auto v = env("SEQASIP_SEED")) cfg["seed"] = std::stoull(*v);
  if (auto v = env("SEQASIP_THREADS")) threads = std::stoi(*v);
  for (const auto& s : f.sets) seqasip::apply_assignment(cfg, s);
  if (f.out) cfg["out"] = *f.out;
  if (f.cache) cfg["cache"] = *f.cache;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.threads) threads = *f.threads;
  cfg["experiment"] = cfg.value("experiment", kind);

  const Json resolved = seqasip::resolve_config(kind, cfg);
  if (f.print_config) {
    std::cout << resolved.dump(2) << "\n";
    return 0;
  }
  if (threads > 0) seqasip::kernels::set_threads(threads);
  const auto result = seqasip::run_experiment(resolved);
  std::cout << "wrote " << resolved.at("out").get<std::string>() << "/manifest.json"
            << (result.pass ? "" : " (hypothesis check failed)") << "\n";
  return result.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential dynamical systems: transfer operators, martingale approximation and limit-law statistics"};
  app.set_version_flag("--version", std::string(seqasip::kVersion) + " (" + seqasip::kGitHash + ")");
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const auto& kind : seqasip::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", flags.sets, "override a config key, KEY=VALUE (dotted keys reach nested objects)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "OpenMP threads (results do not depend on it)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--cache", flags.cache, "matrix cache directory");
    sub->add_flag("--print-config", flags.print_config, "print the resolved config and exit");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  std::string gc_dir;
  std::string gc_root;
  std::uintmax_t gc_bytes = 0;
  auto* gc = app.add_subcommand("cache-gc", "evict least recently used matrix cache entries");
  gc->add_option("dir", gc_dir, "cache directory")->required();
  gc->add_option("--max-bytes", gc_bytes, "size to shrink the cache to")->required();
  gc->add_option("--manifests", gc_root, "tree searched for manifests that pin entries (default: parent of dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (gc->parsed()) {
      for (const auto& name : seqasip::cache_gc(gc_dir, gc_bytes, gc_root)) std::cout << "evicted " << name << "\n";
      return 0;
    }
    return run(chosen, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
