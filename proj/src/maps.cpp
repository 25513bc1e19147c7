#include "seqasip/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "seqasip/errors.hpp"

namespace seqasip {

namespace {

constexpr double kImageSlack = 1e-12;
constexpr double kNewtonResidual = 1e-14;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Rejects keys outside `allowed`, naming the first offender.
void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T required(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InvalidArgument("missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

const char* sign_name(NoiseSign s) {
  switch (s) {
    case NoiseSign::Auto: return "auto";
    case NoiseSign::Plus: return "plus";
    case NoiseSign::Minus: return "minus";
    case NoiseSign::Frozen: return "frozen";
  }
  return "auto";
}

NoiseSign parse_sign(const std::string& s) {
  if (s == "auto") return NoiseSign::Auto;
  if (s == "plus") return NoiseSign::Plus;
  if (s == "minus") return NoiseSign::Minus;
  if (s == "frozen") return NoiseSign::Frozen;
  throw InvalidArgument("unknown noise sign rule '" + s + "'");
}

double poly_value(const std::array<double, 4>& c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
double poly_deriv(const std::array<double, 4>& c, double x) { return c[1] + x * (2.0 * c[2] + x * 3.0 * c[3]); }

// Exact infimum of |q| on [l, r] for the quadratic q = T'.
double inf_abs_derivative(const std::array<double, 4>& c, double l, double r) {
  std::vector<double> pts{l, r};
  if (c[3] != 0.0) {
    const double vertex = -c[2] / (3.0 * c[3]);
    if (vertex > l && vertex < r) pts.push_back(vertex);
  }
  double lo = INFINITY;
  double hi = -INFINITY;
  for (double x : pts) {
    const double q = poly_deriv(c, x);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  // A sign change (or touching zero) means a critical point inside the branch.
  if (lo <= 0.0 && hi >= 0.0) return 0.0;
  return std::min(std::abs(lo), std::abs(hi));
}

double sup_abs_second_derivative(const std::array<double, 4>& c, double l, double r) {
  return std::max(std::abs(2.0 * c[2] + 6.0 * c[3] * l), std::abs(2.0 * c[2] + 6.0 * c[3] * r));
}

}  // namespace

double Piece::inverse(double y) const {
  y = std::clamp(y, lo, hi);
  if (affine) return std::clamp((y - poly[0]) / poly[1], left, right);

  double a = left;
  double b = right;
  double fa = value(a) - y;
  if (std::abs(fa) <= kNewtonResidual) return a;
  double fb = value(b) - y;
  if (std::abs(fb) <= kNewtonResidual) return b;
  // Bracket invariant: fa and fb have opposite signs.
  double x = a - fa * (b - a) / (fb - fa);
  for (int it = 0; it < 200; ++it) {
    const double fx = value(x) - y;
    if (std::abs(fx) <= kNewtonResidual) return x;
    if ((fx < 0.0) == (fa < 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    const double d = derivative(x);
    double next = d != 0.0 ? x - fx / d : a;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (next == x || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b))) {
      const double fn = value(next) - y;
      if (std::abs(fn) <= kNewtonResidual) return next;
      break;
    }
    x = next;
  }
  throw InverseNotConverged("branch inverse on [" + fmt(left) + ", " + fmt(right) + ") did not reach residual 1e-14 at y=" +
                            fmt(y));
}

bool Piece::image_contains(double y) const {
  if (right <= left) return false;
  return increasing ? (y >= lo && y < hi) : (y > lo && y <= hi);
}

IntervalMap IntervalMap::beta(double beta) {
  if (!std::isfinite(beta) || !(beta > 1.0)) throw InvalidArgument("beta must exceed 1 (got " + fmt(beta) + ")");
  IntervalMap m;
  m.kind_ = MapKind::Beta;
  m.param_ = beta;
  m.expansion_ = beta;
  m.distortion_ = 0.0;
  const int count = static_cast<int>(std::ceil(beta));
  for (int k = 0; k < count; ++k) {
    Piece p;
    p.left = k / beta;
    p.right = std::min(1.0, (k + 1) / beta);
    if (!(p.right > p.left)) continue;
    p.poly = {-static_cast<double>(k), beta, 0.0, 0.0};
    p.lo = 0.0;
    p.hi = (k + 1 < beta) ? 1.0 : beta - k;
    m.pieces_.push_back(p);
  }
  m.finish_pieces();
  return m;
}

IntervalMap IntervalMap::linear_noise(int a, double eps) {
  if (a < 2) throw InvalidArgument("a must be an integer >= 2 (got " + std::to_string(a) + ")");
  if (!std::isfinite(eps) || !(eps > -1.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (-1, 1) (got " + fmt(eps) + ")");
  IntervalMap m;
  m.kind_ = MapKind::LinearNoise;
  m.param_ = eps;
  m.a_ = a;
  m.expansion_ = a;
  m.distortion_ = 0.0;
  // a x + eps sweeps [eps, a + eps); each unit interval [k, k+1) it meets is one piece.
  const double first = std::floor(eps);
  const double top = a + eps;
  for (double k = first; k < top; k += 1.0) {
    Piece p;
    const double ylo = std::max(eps, k);
    const double yhi = std::min(top, k + 1.0);
    if (!(yhi > ylo)) continue;
    p.left = (k == first) ? 0.0 : (k - eps) / a;
    p.right = (k + 1.0 >= top) ? 1.0 : (k + 1.0 - eps) / a;
    p.poly = {eps - k, static_cast<double>(a), 0.0, 0.0};
    p.lo = ylo - k;
    p.hi = yhi - k;
    m.pieces_.push_back(p);
  }
  m.finish_pieces();
  return m;
}

IntervalMap IntervalMap::piecewise_c2(std::vector<CubicBranch> branches, double eps) {
  if (branches.empty()) throw InvalidArgument("piecewise map needs at least one branch");
  if (!std::isfinite(eps) || !(eps > -1.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (-1, 1) (got " + fmt(eps) + ")");
  if (branches.front().left != 0.0) throw InvalidArgument("first branch must start at 0");
  for (std::size_t i = 1; i < branches.size(); ++i) {
    if (!(branches[i].left > branches[i - 1].left) || !(branches[i].left < 1.0)) {
      throw InvalidArgument("branch left endpoints must increase strictly inside [0,1) (branch " + std::to_string(i) + ")");
    }
  }
  IntervalMap m;
  m.kind_ = MapKind::PiecewiseC2;
  m.param_ = eps;
  m.branches_ = branches;
  m.expansion_ = INFINITY;
  m.distortion_ = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& br = branches[i];
    const double l = br.left;
    const double r = i + 1 < branches.size() ? branches[i + 1].left : 1.0;
    const double lam = inf_abs_derivative(br.coeffs, l, r);
    if (!(lam > 1.0)) {
      throw InvalidArgument("branch " + std::to_string(i) + " is not expanding (inf|T'| = " + fmt(lam) + ")");
    }
    const double vl = poly_value(br.coeffs, l);
    const double vr = poly_value(br.coeffs, r);
    const double lo = std::min(vl, vr);
    const double hi = std::max(vl, vr);
    if (lo < -kImageSlack || hi > 1.0 + kImageSlack) {
      throw InvalidArgument("branch " + std::to_string(i) + " image [" + fmt(lo) + ", " + fmt(hi) + "] leaves [0,1]");
    }
    auto fits = [&](double s) { return lo + s * eps >= -kImageSlack && hi + s * eps <= 1.0 + kImageSlack; };
    double sgn = 0.0;
    switch (br.sign) {
      case NoiseSign::Auto: sgn = fits(1.0) ? 1.0 : (fits(-1.0) ? -1.0 : 0.0); break;
      case NoiseSign::Plus: sgn = fits(1.0) ? 1.0 : 0.0; break;
      case NoiseSign::Minus: sgn = fits(-1.0) ? -1.0 : 0.0; break;
      case NoiseSign::Frozen: sgn = 0.0; break;
    }
    const double shift = sgn * eps;
    m.shifts_.push_back(shift);

    Piece p;
    p.left = l;
    p.right = r;
    p.poly = br.coeffs;
    p.poly[0] += shift;
    p.affine = br.coeffs[2] == 0.0 && br.coeffs[3] == 0.0;
    p.increasing = poly_deriv(br.coeffs, 0.5 * (l + r)) > 0.0;
    p.lo = std::clamp(lo + shift, 0.0, 1.0);
    p.hi = std::clamp(hi + shift, 0.0, 1.0);
    m.pieces_.push_back(p);
    m.expansion_ = std::min(m.expansion_, lam);
    m.distortion_ = std::max(m.distortion_, sup_abs_second_derivative(br.coeffs, l, r) / lam);
  }
  m.finish_pieces();
  return m;
}

void IntervalMap::finish_pieces() {
  lefts_.clear();
  for (const auto& p : pieces_) lefts_.push_back(p.left);
}

IntervalMap IntervalMap::with_parameter(double p) const {
  switch (kind_) {
    case MapKind::Beta: return beta(p);
    case MapKind::LinearNoise: return linear_noise(a_, p);
    case MapKind::PiecewiseC2: return piecewise_c2(branches_, p);
  }
  return *this;
}

std::optional<IntervalMap::IntegerAffine> IntervalMap::integer_affine() const {
  if (kind_ == MapKind::LinearNoise) return IntegerAffine{static_cast<std::uint64_t>(a_), param_};
  if (kind_ == MapKind::Beta && param_ == std::floor(param_) && param_ < 1e9) {
    return IntegerAffine{static_cast<std::uint64_t>(param_), 0.0};
  }
  return std::nullopt;
}

double IntervalMap::operator()(double x) const {
  const auto it = std::upper_bound(lefts_.begin(), lefts_.end(), x);
  const std::size_t idx = it == lefts_.begin() ? 0 : static_cast<std::size_t>(it - lefts_.begin()) - 1;
  double y = pieces_[idx].value(x);
  if (is_circle_map()) {
    y -= std::floor(y);
    if (y >= 1.0) y = 0.0;
  } else {
    y = std::clamp(y, 0.0, std::nextafter(1.0, 0.0));
  }
  return y;
}

std::vector<Preimage> IntervalMap::inverses(double y) const {
  std::vector<Preimage> out;
  for (const auto& p : pieces_) {
    if (!p.image_contains(y)) continue;
    const double x = p.inverse(y);
    if (x >= p.left && x < p.right) out.push_back({x, std::abs(p.derivative(x))});
  }
  return out;
}

Json IntervalMap::to_json() const {
  Json j;
  switch (kind_) {
    case MapKind::Beta:
      j["kind"] = "beta";
      j["parameters"] = {{"beta", param_}};
      break;
    case MapKind::LinearNoise:
      j["kind"] = "linear_noise";
      j["parameters"] = {{"a", a_}, {"eps", param_}};
      break;
    case MapKind::PiecewiseC2: {
      j["kind"] = "piecewise_c2";
      Json brs = Json::array();
      for (const auto& b : branches_) {
        brs.push_back({{"left", b.left}, {"coeffs", b.coeffs}, {"sign", sign_name(b.sign)}});
      }
      j["parameters"] = {{"eps", param_}, {"branches", brs}};
      break;
    }
  }
  return j;
}

IntervalMap IntervalMap::from_json(const Json& j) {
  check_keys(j, {"kind", "parameters", "schedule"}, "map");
  const auto kind = required<std::string>(j, "kind", "map");
  const Json params = j.contains("parameters") ? j.at("parameters") : Json::object();
  if (kind == "beta") {
    check_keys(params, {"beta"}, "beta parameters");
    return beta(required<double>(params, "beta", "beta parameters"));
  }
  if (kind == "linear_noise") {
    check_keys(params, {"a", "eps"}, "linear_noise parameters");
    const double eps = params.contains("eps") ? required<double>(params, "eps", "linear_noise parameters") : 0.0;
    return linear_noise(required<int>(params, "a", "linear_noise parameters"), eps);
  }
  if (kind == "piecewise_c2") {
    check_keys(params, {"eps", "branches"}, "piecewise_c2 parameters");
    std::vector<CubicBranch> brs;
    for (const auto& b : required<Json>(params, "branches", "piecewise_c2 parameters")) {
      check_keys(b, {"left", "coeffs", "sign"}, "branch");
      CubicBranch cb;
      cb.left = required<double>(b, "left", "branch");
      const auto coeffs = required<std::vector<double>>(b, "coeffs", "branch");
      if (coeffs.empty() || coeffs.size() > 4) throw InvalidArgument("branch coeffs must have 1 to 4 entries");
      std::copy(coeffs.begin(), coeffs.end(), cb.coeffs.begin());
      if (b.contains("sign")) cb.sign = parse_sign(b.at("sign").get<std::string>());
      brs.push_back(cb);
    }
    const double eps = params.contains("eps") ? required<double>(params, "eps", "piecewise_c2 parameters") : 0.0;
    return piecewise_c2(std::move(brs), eps);
  }
  throw InvalidArgument("unknown map kind '" + kind + "'");
}

double eval_map(const IntervalMap& map, double x) { return map(x); }

std::vector<Preimage> branch_inverses(const IntervalMap& map, double y) { return map.inverses(y); }

double ParameterSchedule::param(std::int64_t k) const {
  if (k < 1) throw InvalidArgument("schedule index must be >= 1");
  if (mode == ScheduleMode::Frozen) return limit;
  return limit + amplitude * std::pow(static_cast<double>(k), -exponent);
}

double schedule_param(const ParameterSchedule& schedule, std::int64_t k) { return schedule.param(k); }

Json ParameterSchedule::to_json() const {
  if (mode == ScheduleMode::Frozen) return {{"mode", "frozen"}, {"limit", limit}};
  return {{"mode", "additive"}, {"limit", limit}, {"amplitude", amplitude}, {"exponent", exponent}};
}

ParameterSchedule ParameterSchedule::from_json(const Json& j) {
  check_keys(j, {"mode", "limit", "amplitude", "exponent"}, "schedule");
  const auto mode = required<std::string>(j, "mode", "schedule");
  if (mode == "frozen") return frozen(required<double>(j, "limit", "schedule"));
  if (mode == "additive") {
    ParameterSchedule s = additive(required<double>(j, "limit", "schedule"), required<double>(j, "amplitude", "schedule"),
                                   required<double>(j, "exponent", "schedule"));
    if (s.amplitude < 0.0) throw InvalidArgument("schedule amplitude must be >= 0");
    if (!(s.exponent > 0.0)) throw InvalidArgument("schedule exponent must be > 0");
    return s;
  }
  throw InvalidArgument("unknown schedule mode '" + mode + "'");
}

SequentialSystem::SequentialSystem(IntervalMap family, ParameterSchedule schedule, std::int64_t horizon)
    : family_(std::move(family)), schedule_(schedule), horizon_(horizon) {
  if (horizon_ < 0) throw InvalidArgument("horizon must be >= 0");
  // The schedule is monotone in k, so validity at k=1 and at the limit covers every k.
  (void)family_.with_parameter(schedule_.limit);
  if (schedule_.mode == ScheduleMode::Additive) (void)family_.with_parameter(schedule_.param(1));
}

IntervalMap SequentialSystem::map_at(std::int64_t k) const { return family_.with_parameter(schedule_.param(k)); }

Json SequentialSystem::to_json() const {
  Json j = family_.to_json();
  j["schedule"] = schedule_.to_json();
  return j;
}

SequentialSystem SequentialSystem::from_json(const Json& j, std::int64_t horizon) {
  IntervalMap family = IntervalMap::from_json(j);
  ParameterSchedule schedule = ParameterSchedule::frozen(family.parameter());
  if (j.contains("schedule")) {
    Json s = j.at("schedule");
    if (s.is_object() && !s.contains("limit")) s["limit"] = family.parameter();
    schedule = ParameterSchedule::from_json(s);
  }
  return SequentialSystem(std::move(family), schedule, horizon);
}

MapSequence::MapSequence(const SequentialSystem& system, std::int64_t n) : n_(n) {
  if (system.stationary()) {
    maps_.push_back(system.limit_map());
    return;
  }
  maps_.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 1)));
  for (std::int64_t k = 1; k <= n; ++k) maps_.push_back(system.map_at(k));
  if (maps_.empty()) maps_.push_back(system.limit_map());
}

std::vector<double> sequential_orbit(const SequentialSystem& system, double x0, std::int64_t n) {
  if (n > system.horizon()) throw InvalidArgument("orbit length exceeds the system horizon");
  if (!(x0 >= 0.0 && x0 < 1.0)) throw InvalidArgument("initial point must lie in [0,1)");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  const MapSequence maps(system, n);
  double x = x0;
  for (std::int64_t k = 1; k <= n; ++k) {
    x = maps.at(k)(x);
    out.push_back(x);
  }
  return out;
}

// ---- observables ----

Observable Observable::trig(double frequency, double phase, bool centered) {
  Observable o;
  o.kind_ = Kind::Trig;
  o.a_ = frequency;
  o.b_ = phase;
  o.centered_ = centered;
  o.shift_ = centered ? -o.raw_mean() : 0.0;
  return o;
}

Observable Observable::indicator(double left, double right, bool centered) {
  if (!(left <= right)) throw InvalidArgument("indicator needs left <= right");
  Observable o;
  o.kind_ = Kind::Indicator;
  o.a_ = left;
  o.b_ = right;
  o.centered_ = centered;
  o.shift_ = centered ? -o.raw_mean() : 0.0;
  return o;
}

Observable Observable::sawtooth(bool centered) {
  Observable o;
  o.kind_ = Kind::Sawtooth;
  o.centered_ = centered;
  o.shift_ = centered ? -0.5 : 0.0;
  return o;
}

Observable Observable::grid(std::vector<double> values, bool centered) {
  if (values.empty()) throw InvalidArgument("grid observable needs at least one value");
  Observable o;
  o.kind_ = Kind::GridSampled;
  o.grid_ = std::move(values);
  o.centered_ = centered;
  o.shift_ = centered ? -o.raw_mean() : 0.0;
  return o;
}

double Observable::raw_mean() const {
  switch (kind_) {
    case Kind::Trig:
      if (a_ == 0.0) return std::cos(b_);
      return (std::sin(2.0 * std::numbers::pi * a_ + b_) - std::sin(b_)) / (2.0 * std::numbers::pi * a_);
    case Kind::Indicator: return std::clamp(b_, 0.0, 1.0) - std::clamp(a_, 0.0, 1.0);
    case Kind::Sawtooth: return 0.5;
    case Kind::GridSampled: {
      double s = 0.0;
      for (double v : grid_) s += v;
      return s / static_cast<double>(grid_.size());
    }
  }
  return 0.0;
}

double Observable::raw(double x) const {
  switch (kind_) {
    case Kind::Trig: return std::cos(2.0 * std::numbers::pi * a_ * x + b_);
    case Kind::Indicator: return (x >= a_ && x < b_) ? 1.0 : 0.0;
    case Kind::Sawtooth: return x;
    case Kind::GridSampled: {
      const auto n = grid_.size();
      const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(x * static_cast<double>(n)))), n - 1);
      return grid_[i];
    }
  }
  return 0.0;
}

double Observable::operator()(double x) const { return raw(x) + shift_; }

StepFunction Observable::to_grid(std::size_t cells) const {
  StepFunction out(cells);
  const double w = 1.0 / static_cast<double>(cells);
  switch (kind_) {
    case Kind::Trig: {
      // average of cos over a cell = cos(midpoint phase) * sinc(half-width phase)
      const double half = std::numbers::pi * a_ * w;
      const double damp = half == 0.0 ? 1.0 : std::sin(half) / half;
      for (std::size_t i = 0; i < cells; ++i) {
        const double mid = (static_cast<double>(i) + 0.5) * w;
        out[i] = std::cos(2.0 * std::numbers::pi * a_ * mid + b_) * damp;
      }
      break;
    }
    case Kind::Indicator:
      for (std::size_t i = 0; i < cells; ++i) {
        const double l = static_cast<double>(i) * w;
        const double r = static_cast<double>(i + 1) * w;
        const double overlap = std::max(0.0, std::min(r, b_) - std::max(l, a_));
        out[i] = overlap / w;
      }
      break;
    case Kind::Sawtooth:
      for (std::size_t i = 0; i < cells; ++i) out[i] = (static_cast<double>(i) + 0.5) * w;
      break;
    case Kind::GridSampled: {
      const std::size_t src = grid_.size();
      if (src == cells) {
        out.raw() = grid_;
      } else if (cells % src == 0) {
        for (std::size_t i = 0; i < cells; ++i) out[i] = grid_[i / (cells / src)];
      } else if (src % cells == 0) {
        const std::size_t block = src / cells;
        for (std::size_t i = 0; i < cells; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < block; ++j) s += grid_[i * block + j];
          out[i] = s / static_cast<double>(block);
        }
      } else {
        throw DimensionMismatch("grid observable with " + std::to_string(src) + " cells cannot be resampled to " +
                                std::to_string(cells));
      }
      break;
    }
  }
  if (shift_ != 0.0) out += shift_;
  return out;
}

double Observable::bv_bound() const {
  const double s = std::abs(shift_);
  switch (kind_) {
    case Kind::Trig: {
      const bool integral = a_ == std::floor(a_);
      return 1.0 + s + 4.0 * std::abs(a_) + (integral ? 0.0 : 2.0);
    }
    case Kind::Indicator: return 1.0 + s + 2.0;
    case Kind::Sawtooth: return 1.0 + s + 1.0;
    case Kind::GridSampled: {
      StepFunction g(grid_);
      return g.sup() + s + g.variation();
    }
  }
  return 0.0;
}

bool Observable::is_zero() const {
  return kind_ == Kind::GridSampled && shift_ == 0.0 && std::all_of(grid_.begin(), grid_.end(), [](double v) { return v == 0.0; });
}

Json Observable::to_json() const {
  Json j;
  switch (kind_) {
    case Kind::Trig: j = {{"kind", "trig"}, {"frequency", a_}, {"phase", b_}}; break;
    case Kind::Indicator: j = {{"kind", "indicator"}, {"left", a_}, {"right", b_}}; break;
    case Kind::Sawtooth: j = {{"kind", "sawtooth"}}; break;
    case Kind::GridSampled: j = {{"kind", "grid"}, {"values", grid_}}; break;
  }
  j["centered"] = centered_;
  return j;
}

Observable Observable::from_json(const Json& j) {
  check_keys(j, {"kind", "frequency", "phase", "left", "right", "values", "centered"}, "observable");
  const auto kind = required<std::string>(j, "kind", "observable");
  const bool centered = j.contains("centered") ? required<bool>(j, "centered", "observable") : false;
  if (kind == "trig") {
    return trig(required<double>(j, "frequency", "observable"), j.value("phase", 0.0), centered);
  }
  if (kind == "indicator") {
    return indicator(required<double>(j, "left", "observable"), required<double>(j, "right", "observable"), centered);
  }
  if (kind == "sawtooth") return sawtooth(centered);
  if (kind == "grid") return grid(required<std::vector<double>>(j, "values", "observable"), centered);
  if (kind == "zero") return zero();
  throw InvalidArgument("unknown observable kind '" + kind + "'");
}

// ---- targets ----

double TargetSequence::length(std::int64_t n) const {
  if (n < 1) throw InvalidArgument("target index must be >= 1");
  if (scale <= 0.0) return 0.0;
  return std::min(1.0, scale * std::pow(static_cast<double>(n), -gamma));
}

double TargetSequence::right(std::int64_t n) const { return std::min(1.0, anchor + length(n)); }

Json TargetSequence::to_json() const { return {{"gamma", gamma}, {"scale", scale}, {"anchor", anchor}}; }

TargetSequence TargetSequence::from_json(const Json& j) {
  check_keys(j, {"gamma", "scale", "anchor"}, "targets");
  TargetSequence t;
  t.gamma = required<double>(j, "gamma", "targets");
  t.scale = j.value("scale", 1.0);
  t.anchor = j.value("anchor", 0.0);
  if (t.scale < 0.0) throw InvalidArgument("target scale must be >= 0");
  if (!(t.anchor >= 0.0 && t.anchor < 1.0)) throw InvalidArgument("target anchor must lie in [0,1)");
  return t;
}

}  // namespace seqasip
