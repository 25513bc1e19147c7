#include "seqasip/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace seqasip::kernels {

UlamRow ulam_row(const IntervalMap& map, std::size_t cells, std::size_t i) {
  const double n = static_cast<double>(cells);
  const double a = static_cast<double>(i) / n;
  const double b = static_cast<double>(i + 1) / n;
  UlamRow row;
  for (const auto& p : map.pieces()) {
    const double x0 = std::max(a, p.left);
    const double x1 = std::min(b, p.right);
    if (!(x1 > x0)) continue;
    double y0 = std::clamp(p.value(x0), p.lo, p.hi);
    double y1 = std::clamp(p.value(x1), p.lo, p.hi);
    // preimage endpoints matching y0 / y1, kept exact at the cell boundary
    double xlo = x0, xhi = x1;
    if (!p.increasing) {
      std::swap(y0, y1);
      std::swap(xlo, xhi);
    }
    if (!(y1 > y0)) continue;
    const auto jlo = static_cast<std::size_t>(std::clamp(std::floor(y0 * n), 0.0, n - 1.0));
    const auto jhi = static_cast<std::size_t>(std::clamp(std::ceil(y1 * n), 1.0, n));
    const double inv_slope = p.affine ? 1.0 / std::abs(p.poly[1]) : 0.0;
    for (std::size_t j = jlo; j < jhi; ++j) {
      const double s = std::max(y0, static_cast<double>(j) / n);
      const double e = std::min(y1, static_cast<double>(j + 1) / n);
      if (!(e > s)) continue;
      double len;
      if (p.affine) {
        len = (e - s) * inv_slope;
      } else {
        const double xs = s == y0 ? xlo : p.inverse(s);
        const double xe = e == y1 ? xhi : p.inverse(e);
        len = std::abs(xe - xs);
      }
      const double v = len * n;
      if (v > 0.0) row.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), v});
    }
  }
  std::stable_sort(row.begin(), row.end(), [](const auto& l, const auto& r) { return l.col < r.col; });
  UlamRow merged;
  for (const auto& t : row) {
    if (!merged.empty() && merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }
  return merged;
}

namespace serial {

std::vector<UlamRow> ulam_rows(const IntervalMap& map, std::size_t cells) {
  std::vector<UlamRow> rows(cells);
  for (std::size_t i = 0; i < cells; ++i) rows[i] = ulam_row(map, cells, i);
  return rows;
}

void push(const UlamMatrix& m, std::span<const double> f, std::span<double> out) {
  const auto rp = m.row_ptr();
  const auto cols = m.cols();
  const auto vals = m.vals();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double fi = f[i];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) out[cols[k]] += fi * vals[k];
  }
}

void pull(const UlamMatrix& m, std::span<const double> g, std::span<double> out) {
  const auto rp = m.row_ptr();
  const auto cols = m.cols();
  const auto vals = m.vals();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += vals[k] * g[cols[k]];
    out[i] = s;
  }
}

}  // namespace serial

namespace omp {

std::vector<UlamRow> ulam_rows(const IntervalMap& map, std::size_t cells) {
  std::vector<UlamRow> rows(cells);
  const auto n = static_cast<std::int64_t>(cells);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = ulam_row(map, cells, static_cast<std::size_t>(i));
  return rows;
}

void push(const UlamMatrix& m, std::span<const double> f, std::span<double> out) {
  const auto cp = m.col_ptr();
  const auto rows = m.col_rows();
  const auto vals = m.col_vals();
  const auto n = static_cast<std::int64_t>(m.size());
#pragma omp parallel for schedule(static) if (n >= 4096)
  for (std::int64_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = cp[j]; k < cp[j + 1]; ++k) s += f[rows[k]] * vals[k];
    out[static_cast<std::size_t>(j)] = s;
  }
}

void pull(const UlamMatrix& m, std::span<const double> g, std::span<double> out) {
  const auto rp = m.row_ptr();
  const auto cols = m.cols();
  const auto vals = m.vals();
  const auto n = static_cast<std::int64_t>(m.size());
#pragma omp parallel for schedule(static) if (n >= 4096)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += vals[k] * g[cols[k]];
    out[static_cast<std::size_t>(i)] = s;
  }
}

}  // namespace omp

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace seqasip::kernels
