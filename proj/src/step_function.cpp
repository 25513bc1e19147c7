#include "seqasip/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "seqasip/errors.hpp"

namespace seqasip {

namespace {

void require_same_size(const StepFunction& a, const StepFunction& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("step functions have " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()) + " cells");
  }
}

}  // namespace

std::size_t StepFunction::cell_of(double x) const {
  const auto n = static_cast<double>(values_.size());
  const double scaled = std::floor(x * n);
  if (!(scaled >= 0.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled), values_.size() - 1);
}

double StepFunction::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

double StepFunction::l1() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return s / static_cast<double>(values_.size());
}

double StepFunction::sup() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double StepFunction::variation() const {
  double s = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) s += std::abs(values_[i] - values_[i - 1]);
  return s;
}

double StepFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

StepFunction& StepFunction::operator+=(const StepFunction& o) {
  require_same_size(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

StepFunction& StepFunction::operator-=(const StepFunction& o) {
  require_same_size(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

StepFunction& StepFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

StepFunction& StepFunction::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

StepFunction operator+(StepFunction a, const StepFunction& b) { return a += b; }
StepFunction operator-(StepFunction a, const StepFunction& b) { return a -= b; }
StepFunction operator*(StepFunction a, double s) { return a *= s; }

StepFunction hadamard(const StepFunction& a, const StepFunction& b) {
  require_same_size(a, b);
  StepFunction out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double inner(const StepFunction& f, const StepFunction& g) {
  require_same_size(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s / static_cast<double>(f.size());
}

BvNorms bv_norm(const StepFunction& f) {
  const double l1 = f.l1();
  const double var = f.variation();
  return {l1, var, l1 + var};
}

}  // namespace seqasip
