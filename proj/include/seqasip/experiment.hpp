#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqasip/maps.hpp"

namespace seqasip {

/// Experiment kinds accepted by run_experiment, in CLI order.
const std::vector<std::string>& experiment_kinds();

/// Every key a config of this kind may carry, with its default value.
Json default_config(const std::string& kind);

/// Merges `overrides` into the defaults for `kind`. Unknown top-level keys and
/// malformed nested descriptors are rejected with InvalidArgument naming the key.
Json resolve_config(const std::string& kind, const Json& overrides);

/// Applies "a.b.c=value" to a config. The value is parsed as JSON when it
/// parses, otherwise taken as a string.
void apply_assignment(Json& config, const std::string& assignment);

struct RunResult {
  Json manifest;
  bool pass = true;  // false iff some hypothesis report failed
};

/// Runs one experiment into config["out"], writing CSV + JSON sidecar + gnuplot
/// script per report and finally manifest.json. Reuses the matrix cache in
/// config["cache"] when it is non-empty.
RunResult run_experiment(const Json& config);

/// Evicts least recently used cache entries until the directory holds at most
/// max_bytes. Entries named in a manifest.json anywhere under `manifest_root`
/// (default: the cache directory's parent) are never evicted.
std::vector<std::string> cache_gc(const std::filesystem::path& cache_dir, std::uintmax_t max_bytes,
                                  const std::filesystem::path& manifest_root = {});

}  // namespace seqasip
