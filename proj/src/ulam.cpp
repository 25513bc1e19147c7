#include "seqasip/ulam.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "seqasip/errors.hpp"
#include "seqasip/kernels.hpp"

namespace seqasip {

namespace {

template <class T>
std::uint64_t hash_array(const std::vector<T>& v, std::uint64_t h) {
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  return fnv1a({p, v.size() * sizeof(T)}, h);
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

struct PowerResult {
  std::vector<double> f;
  double residual;
  int iterations;
  bool converged;
};

PowerResult power_iterate(const UlamMatrix& m, std::vector<double> f, double tol, int max_iter) {
  std::vector<double> next(f.size());
  double res = INFINITY;
  for (int it = 1; it <= max_iter; ++it) {
    kernels::omp::push(m, f, next);
    res = l1_distance(f, next);
    f.swap(next);
    if (res < tol) return {std::move(f), res, it, true};
  }
  return {std::move(f), res, max_iter, false};
}

}  // namespace

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

UlamMatrix::UlamMatrix(std::size_t cells, std::vector<Triplet> triplets, std::string descriptor)
    : n_(cells), descriptor_(std::move(descriptor)) {
  if (cells == 0) throw InvalidArgument("Ulam matrix needs at least one cell");
  auto by_pos = [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; };
  if (!std::is_sorted(triplets.begin(), triplets.end(), by_pos)) {
    std::stable_sort(triplets.begin(), triplets.end(), by_pos);
  }
  row_ptr_.assign(n_ + 1, 0);
  std::size_t last_row = n_;
  for (const auto& t : triplets) {
    if (t.row >= n_ || t.col >= n_) throw DimensionMismatch("triplet index outside an N=" + std::to_string(n_) + " matrix");
    if (last_row == t.row && cols_.back() == t.col) {
      vals_.back() += t.value;
      continue;
    }
    last_row = t.row;
    cols_.push_back(t.col);
    vals_.push_back(t.value);
    ++row_ptr_[t.row + 1];
  }
  for (std::size_t i = 0; i < n_; ++i) row_ptr_[i + 1] += row_ptr_[i];

  col_ptr_.assign(n_ + 1, 0);
  for (auto c : cols_) ++col_ptr_[c + 1];
  for (std::size_t j = 0; j < n_; ++j) col_ptr_[j + 1] += col_ptr_[j];
  col_rows_.resize(cols_.size());
  col_vals_.resize(cols_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto pos = fill[cols_[k]]++;
      col_rows_[pos] = static_cast<std::uint32_t>(i);
      col_vals_[pos] = vals_[k];
    }
  }

  const std::uint64_t n64 = n_;
  checksum_ = fnv1a({reinterpret_cast<const unsigned char*>(&n64), sizeof n64});
  checksum_ = hash_array(row_ptr_, checksum_);
  checksum_ = hash_array(cols_, checksum_);
  checksum_ = hash_array(vals_, checksum_);
}

double UlamMatrix::entry(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw DimensionMismatch("entry index outside the matrix");
  const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(b, e, static_cast<std::uint32_t>(j));
  if (it == e || *it != j) return 0.0;
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

double UlamMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k];
  return s;
}

std::vector<double> UlamMatrix::dense() const {
  std::vector<double> d(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i * n_ + cols_[k]] = vals_[k];
  }
  return d;
}

std::vector<UlamMatrix::Triplet> UlamMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(vals_.size());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      out.push_back({static_cast<std::uint32_t>(i), cols_[k], vals_[k]});
    }
  }
  return out;
}

UlamMatrix build_ulam(const IntervalMap& map, std::size_t cells) {
  if (cells == 0) throw InvalidArgument("N must be positive");
  auto rows = kernels::omp::ulam_rows(map, cells);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  std::vector<UlamMatrix::Triplet> trips;
  trips.reserve(total);
  for (auto& r : rows) trips.insert(trips.end(), r.begin(), r.end());
  return UlamMatrix(cells, std::move(trips), map.descriptor());
}

StepFunction push_density(const UlamMatrix& m, const StepFunction& f) {
  if (f.size() != m.size()) throw DimensionMismatch("density has " + std::to_string(f.size()) + " cells, matrix " + std::to_string(m.size()));
  StepFunction out(m.size());
  kernels::omp::push(m, f.values(), out.values());
  return out;
}

StepFunction pull_function(const UlamMatrix& m, const StepFunction& g) {
  if (g.size() != m.size()) throw DimensionMismatch("function has " + std::to_string(g.size()) + " cells, matrix " + std::to_string(m.size()));
  StepFunction out(m.size());
  kernels::omp::pull(m, g.values(), out.values());
  return out;
}

InvariantDensity invariant_density(const UlamMatrix& m, double tol, int max_iter) {
  const std::size_t n = m.size();
  auto from_uniform = power_iterate(m, std::vector<double>(n, 1.0), tol, max_iter);
  if (!from_uniform.converged) {
    throw NonConvergence("power iteration from the uniform density did not converge in " + std::to_string(max_iter) +
                         " iterations (residual " + std::to_string(from_uniform.residual) + ")");
  }
  std::vector<double> ramp(n);
  for (std::size_t i = 0; i < n; ++i) ramp[i] = 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  auto from_ramp = power_iterate(m, std::move(ramp), tol, max_iter);
  if (!from_ramp.converged) {
    throw NonConvergence("power iteration from a non-uniform start oscillates: no spectral gap at N=" + std::to_string(n));
  }
  const double gap = l1_distance(from_uniform.f, from_ramp.f);
  if (gap > std::max(1e3 * tol, 1e-9)) {
    throw NonConvergence("invariant density is not unique at N=" + std::to_string(n) + " (fixed points differ by " +
                         std::to_string(gap) + " in L1)");
  }
  return {StepFunction(std::move(from_uniform.f)), from_uniform.residual, from_uniform.iterations};
}

}  // namespace seqasip
