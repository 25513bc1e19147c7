#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqasip/maps.hpp"
#include "seqasip/step_function.hpp"

namespace seqasip {

/// Ulam discretization of a transfer operator on N uniform cells.
///
/// Entry (i, j) is m(A_i cap T^-1 A_j) / m(A_i). Stored as CSR with a CSC
/// copy so both the density action f -> fM (column gather) and the function
/// action g -> Mg (row gather) run as fixed-order reductions.
class UlamMatrix {
 public:
  struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
  };

  UlamMatrix() = default;
  /// Triplets may come in any order; duplicates are summed in input order.
  UlamMatrix(std::size_t cells, std::vector<Triplet> triplets, std::string descriptor);

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return vals_.size(); }
  const std::string& descriptor() const { return descriptor_; }
  /// 64-bit FNV-1a hash over N and the CSR arrays.
  std::uint64_t checksum() const { return checksum_; }

  double entry(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;
  std::vector<double> dense() const;
  std::vector<Triplet> triplets() const;

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> cols() const { return cols_; }
  std::span<const double> vals() const { return vals_; }
  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const std::uint32_t> col_rows() const { return col_rows_; }
  std::span<const double> col_vals() const { return col_vals_; }

  friend bool operator==(const UlamMatrix& a, const UlamMatrix& b) {
    return a.n_ == b.n_ && a.row_ptr_ == b.row_ptr_ && a.cols_ == b.cols_ && a.vals_ == b.vals_;
  }

 private:
  std::size_t n_ = 0;
  std::string descriptor_;
  std::uint64_t checksum_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> col_rows_;
  std::vector<double> col_vals_;
};

/// Exact Ulam matrix from branch-inverse images of the cell endpoints.
UlamMatrix build_ulam(const IntervalMap& map, std::size_t cells);

/// Density action: returns f M. Preserves the integral.
StepFunction push_density(const UlamMatrix& m, const StepFunction& f);
/// Function (Koopman) action: returns M g, the conditional average of g o T on each cell.
StepFunction pull_function(const UlamMatrix& m, const StepFunction& g);

struct InvariantDensity {
  StepFunction density;
  double residual;  // L1 distance between the last two iterates
  int iterations;
};

/// Power iteration on f -> fM from the uniform density.
///
/// A second iteration from a ramp density must settle on the same fixed point;
/// otherwise the matrix has no spectral gap at this resolution (periodic or
/// reducible) and NonConvergence is thrown.
InvariantDensity invariant_density(const UlamMatrix& m, double tol = 1e-13, int max_iter = 100000);

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace seqasip
