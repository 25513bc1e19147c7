#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqasip/step_function.hpp"

namespace seqasip {

using Json = nlohmann::json;

enum class MapKind { Beta, LinearNoise, PiecewiseC2 };

/// How a PiecewiseC2 branch reacts to the additive noise eps.
/// Auto tries +eps, then -eps, and leaves the branch unmoved if neither keeps
/// the branch image inside [0,1]. Plus/Minus only try their own sign.
enum class NoiseSign { Auto, Plus, Minus, Frozen };

struct CubicBranch {
  double left = 0.0;
  std::array<double, 4> coeffs{};  // c0 + c1 x + c2 x^2 + c3 x^3
  NoiseSign sign = NoiseSign::Auto;
};

/// A maximal subinterval [left, right) on which the map is a continuous,
/// strictly monotone polynomial of degree <= 3 with image inside [0,1].
struct Piece {
  double left = 0.0;
  double right = 0.0;
  std::array<double, 4> poly{};
  double lo = 0.0;  // closure of the image
  double hi = 0.0;
  bool increasing = true;
  bool affine = true;

  double value(double x) const { return poly[0] + x * (poly[1] + x * (poly[2] + x * poly[3])); }
  double derivative(double x) const { return poly[1] + x * (2.0 * poly[2] + x * 3.0 * poly[3]); }
  double second_derivative(double x) const { return 2.0 * poly[2] + 6.0 * poly[3] * x; }
  /// Point of [left, right] mapped to y in [lo, hi]. Throws InverseNotConverged.
  double inverse(double y) const;
  /// True when y lies in the image of the half-open domain.
  bool image_contains(double y) const;
};

struct Preimage {
  double x;
  double deriv;  // |T'(x)|
};

/// One-dimensional piecewise expanding map of [0,1) from the catalog.
///
/// Immutable after construction; the factories validate every invariant and
/// throw InvalidArgument with the offending parameter named.
class IntervalMap {
 public:
  static IntervalMap beta(double beta);
  static IntervalMap linear_noise(int a, double eps);
  static IntervalMap piecewise_c2(std::vector<CubicBranch> branches, double eps);

  MapKind kind() const { return kind_; }
  /// The scheduled parameter: beta for BetaMap, eps otherwise.
  double parameter() const { return param_; }
  IntervalMap with_parameter(double p) const;

  /// Certified lower bound on inf |T'|.
  double expansion() const { return expansion_; }
  /// Certified upper bound on sup |T''/T'| (0 for piecewise-linear kinds).
  double distortion() const { return distortion_; }
  bool is_circle_map() const { return kind_ != MapKind::PiecewiseC2; }

  std::span<const Piece> pieces() const { return pieces_; }
  const std::vector<CubicBranch>& branches() const { return branches_; }
  /// Noise shift actually applied to each PiecewiseC2 branch.
  const std::vector<double>& branch_shifts() const { return shifts_; }
  int slope_factor() const { return a_; }

  /// x -> a x + c (mod 1) with integer a, when the map has that form.
  struct IntegerAffine {
    std::uint64_t a;
    double offset;
  };
  std::optional<IntegerAffine> integer_affine() const;

  double operator()(double x) const;
  std::vector<Preimage> inverses(double y) const;

  Json to_json() const;
  static IntervalMap from_json(const Json& j);
  /// Canonical descriptor string (stable key for caching).
  std::string descriptor() const { return to_json().dump(); }

 private:
  IntervalMap() = default;
  void finish_pieces();

  MapKind kind_ = MapKind::Beta;
  double param_ = 0.0;
  int a_ = 0;
  std::vector<CubicBranch> branches_;
  std::vector<double> shifts_;
  std::vector<Piece> pieces_;
  std::vector<double> lefts_;
  double expansion_ = 0.0;
  double distortion_ = 0.0;
};

double eval_map(const IntervalMap& map, double x);
std::vector<Preimage> branch_inverses(const IntervalMap& map, double y);

enum class ScheduleMode { Additive, Frozen };

/// param_k = limit + amplitude * k^(-exponent) (additive) or limit (frozen).
struct ParameterSchedule {
  double limit = 0.0;
  double amplitude = 0.0;
  double exponent = 1.0;
  ScheduleMode mode = ScheduleMode::Frozen;

  static ParameterSchedule frozen(double limit) { return {limit, 0.0, 1.0, ScheduleMode::Frozen}; }
  static ParameterSchedule additive(double limit, double amplitude, double exponent) {
    return {limit, amplitude, exponent, ScheduleMode::Additive};
  }

  double param(std::int64_t k) const;
  /// Decay too slow for the algebraic-convergence hypothesis (exponent <= 1/2).
  bool slow_decay_warning() const { return mode == ScheduleMode::Additive && amplitude != 0.0 && exponent <= 0.5; }

  Json to_json() const;
  static ParameterSchedule from_json(const Json& j);
};

double schedule_param(const ParameterSchedule& schedule, std::int64_t k);

/// Non-stationary composition T_n o ... o T_1 with T_k = family(param_k).
class SequentialSystem {
 public:
  SequentialSystem(IntervalMap family, ParameterSchedule schedule, std::int64_t horizon);

  const IntervalMap& family() const { return family_; }
  const ParameterSchedule& schedule() const { return schedule_; }
  std::int64_t horizon() const { return horizon_; }
  bool stationary() const { return schedule_.mode == ScheduleMode::Frozen || schedule_.amplitude == 0.0; }

  IntervalMap map_at(std::int64_t k) const;
  IntervalMap limit_map() const { return family_.with_parameter(schedule_.limit); }

  /// {"kind", "parameters", "schedule"} descriptor.
  Json to_json() const;
  static SequentialSystem from_json(const Json& j, std::int64_t horizon);

 private:
  IntervalMap family_;
  ParameterSchedule schedule_;
  std::int64_t horizon_;
};

/// Maps T_1..T_n materialized once for hot loops; a stationary system keeps one copy.
class MapSequence {
 public:
  MapSequence(const SequentialSystem& system, std::int64_t n);
  const IntervalMap& at(std::int64_t k) const { return maps_.size() == 1 ? maps_[0] : maps_[static_cast<std::size_t>(k - 1)]; }
  std::int64_t length() const { return n_; }
  bool stationary() const { return maps_.size() == 1; }

 private:
  std::vector<IntervalMap> maps_;
  std::int64_t n_;
};

std::vector<double> sequential_orbit(const SequentialSystem& system, double x0, std::int64_t n);

/// Observable phi on [0,1). Centered observables have zero Lebesgue integral.
class Observable {
 public:
  enum class Kind { Trig, Indicator, Sawtooth, GridSampled };

  /// cos(2 pi f x + phase)
  static Observable trig(double frequency, double phase = 0.0, bool centered = true);
  static Observable indicator(double left, double right, bool centered = false);
  /// x on [0,1)
  static Observable sawtooth(bool centered = false);
  static Observable grid(std::vector<double> values, bool centered = false);
  static Observable zero() { return grid({0.0}, false); }

  Kind kind() const { return kind_; }
  bool centered() const { return centered_; }
  /// Lebesgue mean of the uncentered function.
  double raw_mean() const;
  /// Value at x, including the centering shift.
  double operator()(double x) const;
  /// Cell averages on N cells, including the centering shift.
  StepFunction to_grid(std::size_t cells) const;
  /// Declared upper bound on sup|phi| + Var(phi).
  double bv_bound() const;
  bool is_zero() const;

  Json to_json() const;
  static Observable from_json(const Json& j);

 private:
  double raw(double x) const;

  Kind kind_ = Kind::GridSampled;
  double a_ = 0.0;  // frequency or left
  double b_ = 0.0;  // phase or right
  std::vector<double> grid_;
  bool centered_ = false;
  double shift_ = 0.0;
};

/// Nested shrinking targets A_n = [anchor, anchor + min(1, scale n^-gamma)) inside [0,1).
struct TargetSequence {
  double gamma = 0.5;
  double scale = 1.0;
  double anchor = 0.0;

  double length(std::int64_t n) const;
  double right(std::int64_t n) const;
  bool contains(std::int64_t n, double x) const { return x >= anchor && x < right(n); }
  /// gamma outside (0,1) is outside the theorem's hypotheses.
  bool warning() const { return !(gamma > 0.0 && gamma < 1.0); }

  Json to_json() const;
  static TargetSequence from_json(const Json& j);
};

}  // namespace seqasip
