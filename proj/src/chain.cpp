#include "seqasip/chain.hpp"

#include "seqasip/errors.hpp"

namespace seqasip {

MatrixProvider::MatrixProvider(std::size_t cells, MatrixCache* disk, std::size_t capacity)
    : cells_(cells), disk_(disk), capacity_(std::max<std::size_t>(1, capacity)) {
  if (cells == 0) throw InvalidArgument("N must be positive");
}

std::shared_ptr<const UlamMatrix> MatrixProvider::get(const IntervalMap& map) {
  const auto key = map.descriptor();
  for (auto it = lru_.begin(); it != lru_.end(); ++it) {
    if (it->first == key) {
      lru_.splice(lru_.begin(), lru_, it);
      return lru_.front().second;
    }
  }
  auto m = disk_ ? disk_->get(map, cells_) : std::make_shared<const UlamMatrix>(build_ulam(map, cells_));
  lru_.emplace_front(key, m);
  if (lru_.size() > capacity_) lru_.pop_back();
  return m;
}

ChainState::ChainState(SequentialSystem system, std::size_t cells, ChainOptions options)
    : system_(std::move(system)),
      provider_(cells, options.cache, 4),
      keep_history_(options.keep_history) {
  if (options.initial) {
    if (options.initial->size() != cells) throw DimensionMismatch("initial density has the wrong cell count");
    if (system_.stationary()) {
      fixed_density_ = *options.initial;
    }
    densities_.push_back(std::move(*options.initial));
  } else {
    densities_.emplace_back(cells, 1.0);
  }
  if (system_.stationary()) stationary_map_ = system_.limit_map();
}

const IntervalMap& ChainState::map(std::int64_t k) {
  if (k < 1) throw InvalidArgument("map index starts at 1");
  if (k > system_.horizon()) {
    throw InvalidArgument("map index " + std::to_string(k) + " exceeds the horizon " + std::to_string(system_.horizon()));
  }
  if (stationary_map_) return *stationary_map_;
  if (k != map_k_) {
    map_cache_ = system_.map_at(k);
    map_k_ = k;
  }
  return *map_cache_;
}

std::shared_ptr<const UlamMatrix> ChainState::matrix(std::int64_t k) {
  if (stationary_map_) {
    if (!stationary_matrix_) stationary_matrix_ = provider_.get(*stationary_map_);
    return stationary_matrix_;
  }
  return provider_.get(map(k));
}

const StepFunction& ChainState::density(std::int64_t k) {
  if (k < 0) throw InvalidArgument("density index must be >= 0");
  if (k > system_.horizon()) {
    throw InvalidArgument("density index " + std::to_string(k) + " exceeds the horizon " + std::to_string(system_.horizon()));
  }
  if (fixed_density_) return *fixed_density_;
  if (k < first_k_) {
    throw InvalidArgument("density " + std::to_string(k) + " was discarded (history disabled)");
  }
  while (first_k_ + static_cast<std::int64_t>(densities_.size()) <= k) {
    const std::int64_t next = first_k_ + static_cast<std::int64_t>(densities_.size());
    auto pushed = push_density(*matrix(next), densities_.back());
    densities_.push_back(std::move(pushed));
    if (!keep_history_ && densities_.size() > 3) {
      densities_.pop_front();
      ++first_k_;
    }
  }
  return densities_[static_cast<std::size_t>(k - first_k_)];
}

StepFunction compose_chain(ChainState& state, std::int64_t n) { return state.density(n); }

}  // namespace seqasip
