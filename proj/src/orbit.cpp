#include "seqasip/orbit.hpp"

#include <algorithm>

#include "seqasip/errors.hpp"

namespace seqasip {

DensitySampler::DensitySampler(const StepFunction& density) : cdf_(density.size()) {
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (density[i] < 0.0) throw InvalidArgument("sampling density has a negative cell");
    total += density[i];
    cdf_[i] = total;
  }
  if (!(total > 0.0)) throw InvalidArgument("sampling density has zero mass");
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double DensitySampler::operator()(Stream& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  const double lo = i == 0 ? 0.0 : cdf_[i - 1];
  const double w = cdf_[i] - lo;
  const double t = w > 0.0 ? (u - lo) / w : 0.5;
  const double n = static_cast<double>(cdf_.size());
  return std::min((static_cast<double>(i) + t) / n, std::nextafter(1.0, 0.0));
}

}  // namespace seqasip
