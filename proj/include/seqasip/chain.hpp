#pragma once

#include <cstdint>
#include <deque>
#include <list>
#include <memory>
#include <optional>
#include <vector>

#include "seqasip/container.hpp"
#include "seqasip/maps.hpp"
#include "seqasip/step_function.hpp"
#include "seqasip/ulam.hpp"

namespace seqasip {

/// Builds Ulam matrices on a fixed grid, keeping the most recent few in memory
/// and optionally reading through a disk cache.
class MatrixProvider {
 public:
  explicit MatrixProvider(std::size_t cells, MatrixCache* disk = nullptr, std::size_t capacity = 4);

  std::size_t cells() const { return cells_; }
  std::shared_ptr<const UlamMatrix> get(const IntervalMap& map);

 private:
  std::size_t cells_;
  MatrixCache* disk_;
  std::size_t capacity_;
  std::list<std::pair<std::string, std::shared_ptr<const UlamMatrix>>> lru_;
};

struct ChainOptions {
  MatrixCache* cache = nullptr;
  /// Keep every density P_k 1. When false only a short trailing window is held,
  /// which bounds memory for long horizons; earlier indices then throw.
  bool keep_history = true;
  /// Start from this density instead of Lebesgue. For a stationary system this
  /// should be the invariant density, which is then used for every k.
  std::optional<StepFunction> initial;
};

/// Densities P_k 1 = (P_{k-1} 1) M_k of a sequential system on N cells,
/// computed forward on demand.
class ChainState {
 public:
  ChainState(SequentialSystem system, std::size_t cells, ChainOptions options = {});

  const SequentialSystem& system() const { return system_; }
  std::size_t cells() const { return provider_.cells(); }
  bool stationary() const { return system_.stationary(); }
  /// True when the start density is an invariant density held fixed for all k.
  bool stationary_start() const { return fixed_density_.has_value(); }

  const IntervalMap& map(std::int64_t k);
  std::shared_ptr<const UlamMatrix> matrix(std::int64_t k);
  const StepFunction& density(std::int64_t k);

 private:
  SequentialSystem system_;
  MatrixProvider provider_;
  bool keep_history_;
  std::optional<StepFunction> fixed_density_;
  std::deque<StepFunction> densities_;
  std::int64_t first_k_ = 0;
  std::optional<IntervalMap> stationary_map_;
  std::shared_ptr<const UlamMatrix> stationary_matrix_;
  std::int64_t map_k_ = -1;
  std::optional<IntervalMap> map_cache_;
};

/// P_n 1 = 1 M_1 ... M_n. n = 0 gives the start density.
StepFunction compose_chain(ChainState& state, std::int64_t n);

}  // namespace seqasip
