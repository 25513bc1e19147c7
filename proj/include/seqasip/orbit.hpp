#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>

#include "seqasip/maps.hpp"
#include "seqasip/rng.hpp"
#include "seqasip/step_function.hpp"

#include <vector>

namespace seqasip {

/// Evaluation form of one map chosen for orbit loops.
///
/// Maps x -> a x + c (mod 1) with integer a are advanced on a 64-bit fixed
/// point state; every step shifts in a fresh random low digit. In double
/// precision such orbits lose one bit per step and reach 0 after ~53 steps for
/// even a; the fixed-point walk keeps the exact distribution of the orbit of a
/// uniformly distributed point at every n.
class MapStepper {
 public:
  explicit MapStepper(const IntervalMap& map) : map_(&map) {
    if (auto ia = map.integer_affine()) {
      integer_ = true;
      a_ = ia->a;
      shift_bits_ = (a_ & (a_ - 1)) == 0 ? std::countr_zero(a_) : -1;
      const double frac = ia->offset - std::floor(ia->offset);
      offset_ = static_cast<std::uint64_t>(std::ldexp(frac, 64));
    }
  }

  bool integer() const { return integer_; }
  const IntervalMap& map() const { return *map_; }
  std::uint64_t a() const { return a_; }
  int shift_bits() const { return shift_bits_; }
  std::uint64_t offset() const { return offset_; }

 private:
  const IntervalMap* map_;
  bool integer_ = false;
  std::uint64_t a_ = 0;
  int shift_bits_ = -1;
  std::uint64_t offset_ = 0;
};

/// Position of one orbit, in fixed point or double form.
class OrbitWalker {
 public:
  /// Lebesgue-distributed start with 64 random bits.
  void start_uniform(Stream& rng) {
    fixed_ = rng.bits();
    is_fixed_ = true;
    x_ = to_double(fixed_);
  }
  /// Start at x. When the walk switches to fixed point, bits below 2^-53 are random.
  void start_at(double x) {
    x_ = x;
    is_fixed_ = false;
  }

  double position() const { return x_; }

  double step(const MapStepper& m, Stream& rng) {
    if (m.integer()) {
      if (!is_fixed_) {
        fixed_ = (static_cast<std::uint64_t>(std::ldexp(x_, 53)) << 11) | (rng.bits() >> 53);
        is_fixed_ = true;
      }
      std::uint64_t digit;
      if (m.shift_bits() >= 0) {
        digit = take_bits(m.shift_bits(), rng);
        fixed_ = (fixed_ << m.shift_bits()) + digit + m.offset();
      } else {
        digit = rng.below(m.a());
        fixed_ = fixed_ * m.a() + digit + m.offset();
      }
      x_ = to_double(fixed_);
    } else {
      is_fixed_ = false;
      x_ = m.map()(x_);
    }
    return x_;
  }

 private:
  static double to_double(std::uint64_t k) { return static_cast<double>(k >> 11) * 0x1.0p-53; }

  std::uint64_t take_bits(int b, Stream& rng) {
    if (b == 0) return 0;
    if (avail_ < b) {
      pool_ = rng.bits();
      avail_ = 64;
    }
    const std::uint64_t v = b == 64 ? pool_ : (pool_ & ((std::uint64_t{1} << b) - 1));
    pool_ = b == 64 ? 0 : pool_ >> b;
    avail_ -= b;
    return v;
  }

  double x_ = 0.0;
  std::uint64_t fixed_ = 0;
  bool is_fixed_ = false;
  std::uint64_t pool_ = 0;
  int avail_ = 0;
};

}  // namespace seqasip

namespace seqasip {

/// Inverse-CDF sampler for a step density on [0,1).
class DensitySampler {
 public:
  explicit DensitySampler(const StepFunction& density);
  double operator()(Stream& rng) const;

 private:
  std::vector<double> cdf_;  // cumulative cell masses, last entry 1
};

}  // namespace seqasip
