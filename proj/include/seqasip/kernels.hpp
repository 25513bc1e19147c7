#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp. Both perform every
// floating-point reduction in the same order, so their outputs agree bitwise
// for any thread count; the unit tests hold them to that.

#include <cstddef>
#include <span>
#include <vector>

#include "seqasip/maps.hpp"
#include "seqasip/ulam.hpp"

namespace seqasip::kernels {

/// Sorted (column, value) entries of one Ulam row.
using UlamRow = std::vector<UlamMatrix::Triplet>;

/// Row i of the Ulam matrix of `map` on `cells` cells.
UlamRow ulam_row(const IntervalMap& map, std::size_t cells, std::size_t i);

namespace serial {

std::vector<UlamRow> ulam_rows(const IntervalMap& map, std::size_t cells);
/// out_j = sum_i f_i M_ij, scattering row by row.
void push(const UlamMatrix& m, std::span<const double> f, std::span<double> out);
/// out_i = sum_j M_ij g_j.
void pull(const UlamMatrix& m, std::span<const double> g, std::span<double> out);

}  // namespace serial

namespace omp {

std::vector<UlamRow> ulam_rows(const IntervalMap& map, std::size_t cells);
/// Column gather over the CSC copy; same summation order as serial::push.
void push(const UlamMatrix& m, std::span<const double> f, std::span<double> out);
void pull(const UlamMatrix& m, std::span<const double> g, std::span<double> out);

}  // namespace omp

/// Current OpenMP team size (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace seqasip::kernels
