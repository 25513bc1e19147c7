#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace seqasip {

/// Piecewise-constant function on N uniform cells [i/N, (i+1)/N) of [0,1).
///
/// Values are cell values (equivalently cell averages). Norms follow the
/// grid conventions: L1 = (1/N) sum |v_i|, Var = sum |v_{i+1} - v_i| over
/// interior jumps only, BV = L1 + Var.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(std::size_t cells, double fill = 0.0) : values_(cells, fill) {}
  explicit StepFunction(std::vector<double> values) : values_(std::move(values)) {}

  static StepFunction constant(std::size_t cells, double c) { return StepFunction(cells, c); }

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  /// Cell containing x, clamped into [0, N-1].
  std::size_t cell_of(double x) const;
  /// Value of the cell containing x.
  double at(double x) const { return values_[cell_of(x)]; }

  double integral() const;
  double l1() const;
  double sup() const;
  double variation() const;
  double bv() const { return l1() + variation(); }
  double min() const;

  StepFunction& operator+=(const StepFunction& o);
  StepFunction& operator-=(const StepFunction& o);
  StepFunction& operator*=(double s);
  StepFunction& operator+=(double c);

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<double> values_;
};

StepFunction operator+(StepFunction a, const StepFunction& b);
StepFunction operator-(StepFunction a, const StepFunction& b);
StepFunction operator*(StepFunction a, double s);
/// Cellwise product.
StepFunction hadamard(const StepFunction& a, const StepFunction& b);

/// <f, g> = (1/N) sum f_i g_i, the Lebesgue pairing of two step functions.
double inner(const StepFunction& f, const StepFunction& g);

struct BvNorms {
  double l1;
  double var;
  double bv;
};

BvNorms bv_norm(const StepFunction& f);

}  // namespace seqasip
