#include "seqasip/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seqasip/errors.hpp"
#include "seqasip/kernels.hpp"
#include "seqasip/rng.hpp"

namespace seqasip {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

StepFunction normalized(StepFunction f) {
  const double bv = f.bv();
  if (bv > 0.0) f *= 1.0 / bv;
  return f;
}

std::vector<UlamMatrix> build_all(const std::vector<IntervalMap>& family, std::size_t cells) {
  if (family.empty()) throw InvalidArgument("family must contain at least one map");
  std::vector<UlamMatrix> out;
  out.reserve(family.size());
  for (const auto& m : family) out.push_back(build_ulam(m, cells));
  return out;
}

std::vector<std::vector<std::size_t>> concatenations(std::size_t family_size, int trials, int n_max, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> seq(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Stream rng(seed, static_cast<std::uint64_t>(t));
    auto& s = seq[static_cast<std::size_t>(t)];
    s.resize(static_cast<std::size_t>(n_max));
    for (auto& i : s) i = static_cast<std::size_t>(rng.below(family_size));
  }
  return seq;
}

std::string describe_family(const std::vector<IntervalMap>& family) {
  std::ostringstream os;
  os << "family of " << family.size() << ":";
  for (const auto& m : family) os << " " << m.descriptor();
  return os.str();
}

}  // namespace

std::string to_string(HypothesisKind k) {
  switch (k) {
    case HypothesisKind::DFLY: return "DFLY";
    case HypothesisKind::LB: return "LB";
    case HypothesisKind::EXA: return "EXA";
    case HypothesisKind::LIP: return "LIP";
    case HypothesisKind::POS: return "POS";
  }
  return "?";
}

double HypothesisReport::constant(const std::string& name) const {
  const auto it = constants.find(name);
  if (it == constants.end()) throw InvalidArgument("report has no constant '" + name + "'");
  return it->second;
}

Json HypothesisReport::to_json() const {
  Json c = Json::object();
  for (const auto& [k, v] : constants) c[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
  return {{"kind", to_string(kind)}, {"constants", c}, {"sample", sample}, {"pass", pass}, {"curve_label", curve_label}};
}

double fit_floor(std::size_t cells) { return 100.0 * kEps * static_cast<double>(cells); }

LogLinearFit fit_log_linear(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("log-linear fit needs at least two points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += std::log(y[i]);
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (std::log(y[i]) - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, n};
}

std::vector<StepFunction> dyadic_dictionary(std::size_t cells) {
  std::vector<StepFunction> out;
  for (int level = 0; level <= 6; ++level) {
    const int parts = 1 << level;
    for (int k = 0; k < parts; ++k) {
      const double l = static_cast<double>(k) / parts;
      const double r = static_cast<double>(k + 1) / parts;
      out.push_back(normalized(Observable::indicator(l, r).to_grid(cells)));
    }
  }
  return out;
}

std::vector<StepFunction> default_dictionary(std::size_t cells) {
  auto out = dyadic_dictionary(cells);
  out.push_back(normalized(Observable::sawtooth().to_grid(cells)));
  for (int k = 1; k <= 8; ++k) out.push_back(normalized(Observable::trig(k, 0.0, false).to_grid(cells)));
  return out;
}

double operator_distance(const UlamMatrix& m1, const UlamMatrix& m2, const std::vector<StepFunction>& dictionary) {
  if (m1.size() != m2.size()) throw DimensionMismatch("operator_distance needs matrices on the same grid");
  const std::size_t n = m1.size();
  std::vector<double> best(dictionary.size(), 0.0);
  for (const auto& f : dictionary) {
    if (f.size() != n) throw DimensionMismatch("dictionary element on the wrong grid");
  }
  if (dictionary.empty()) return 0.0;
  const auto count = static_cast<std::int64_t>(dictionary.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t d = 0; d < count; ++d) {
    const auto& f = dictionary[static_cast<std::size_t>(d)];
    const double bv = f.bv();
    if (!(bv > 0.0)) continue;
    std::vector<double> a(n), b(n);
    kernels::serial::push(m1, f.values(), a);
    kernels::serial::push(m2, f.values(), b);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
    best[static_cast<std::size_t>(d)] = s / static_cast<double>(n) / bv;
  }
  return *std::max_element(best.begin(), best.end());
}

HypothesisReport verify_dfly(const std::vector<IntervalMap>& family, const DflyOptions& opt,
                             const std::vector<StepFunction>* dictionary) {
  if (opt.n_max < 1 || opt.trials < 1) throw InvalidArgument("n_max and trials must be positive");
  const std::size_t cells = opt.cells;
  const auto mats = build_all(family, cells);
  if (dictionary) {
    for (const auto& f : *dictionary) {
      if (f.size() != cells) throw DimensionMismatch("dictionary element on the wrong grid");
    }
  }
  const auto dict_owned = dictionary ? std::vector<StepFunction>{} : default_dictionary(cells);
  const auto& dict = dictionary ? *dictionary : dict_owned;
  const auto seqs = concatenations(family.size(), opt.trials, opt.n_max, opt.seed);

  const std::size_t nd = dict.size();
  const auto nm = static_cast<std::size_t>(opt.n_max);
  // bv[(t * nd + d) * (n_max + 1) + n] = ||P_n f_d||_BV along trial t
  std::vector<double> bv(static_cast<std::size_t>(opt.trials) * nd * (nm + 1));
  std::vector<double> l1(nd);
  for (std::size_t d = 0; d < nd; ++d) l1[d] = dict[d].l1() / dict[d].bv();
  const auto jobs = static_cast<std::int64_t>(opt.trials) * static_cast<std::int64_t>(nd);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t job = 0; job < jobs; ++job) {
    const auto t = static_cast<std::size_t>(job) / nd;
    const auto d = static_cast<std::size_t>(job) % nd;
    const double scale = 1.0 / dict[d].bv();
    StepFunction f = dict[d] * scale;
    StepFunction g(cells);
    double* row = &bv[static_cast<std::size_t>(job) * (nm + 1)];
    row[0] = f.bv();
    for (std::size_t n = 1; n <= nm; ++n) {
      kernels::serial::push(mats[seqs[t][n - 1]], f.values(), g.values());
      std::swap(f, g);
      row[n] = f.bv();
    }
  }

  const std::size_t tail_from = std::max<std::size_t>(1, (nm + 1) / 2);
  double b_hat = 0.0;
  for (std::size_t job = 0; job < static_cast<std::size_t>(jobs); ++job) {
    const double l = l1[job % nd];
    if (!(l > 0.0)) continue;
    for (std::size_t n = tail_from; n <= nm; ++n) b_hat = std::max(b_hat, bv[job * (nm + 1) + n] / l);
  }
  std::vector<double> excess(nm + 1, 0.0);
  double max_ratio = 0.0;
  for (std::size_t job = 0; job < static_cast<std::size_t>(jobs); ++job) {
    const double l = l1[job % nd];
    for (std::size_t n = 0; n <= nm; ++n) {
      const double v = bv[job * (nm + 1) + n];
      excess[n] = std::max(excess[n], v - b_hat * l);
      if (n == 1) max_ratio = std::max(max_ratio, v);
    }
  }

  const double floor = fit_floor(cells);
  std::size_t w = 0;
  while (w + 1 <= nm && excess[w + 1] > floor) ++w;
  double rho = 0.0;
  if (!(excess[0] > floor)) {
    rho = 0.0;
  } else if (w == 0) {
    rho = std::max(excess[1], floor) / excess[0];
  } else {
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n <= w; ++n) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(excess[n]);
    }
    rho = std::exp(fit_log_linear(xs, ys).slope);
  }
  double a_hat = 0.0;
  if (rho > 0.0) {
    for (std::size_t n = 0; n <= nm; ++n) {
      if (excess[n] > 0.0) a_hat = std::max(a_hat, excess[n] / std::pow(rho, static_cast<double>(n)));
    }
  }

  HypothesisReport r;
  r.kind = HypothesisKind::DFLY;
  r.constants = {{"A", a_hat}, {"rho", rho}, {"B", b_hat}, {"fit_window", static_cast<double>(w)},
                 {"max_single_step_ratio", max_ratio}};
  std::ostringstream os;
  os << describe_family(family) << "; N=" << cells << " n_max=" << opt.n_max << " trials=" << opt.trials
     << " seed=" << opt.seed << " dictionary=" << nd;
  r.sample = os.str();
  r.pass = std::isfinite(rho) && rho > 0.0 && rho < 1.0 && std::isfinite(a_hat) && std::isfinite(b_hat);
  r.curve_label = "bv_excess";
  r.curve = excess;
  return r;
}

HypothesisReport verify_lb(const std::vector<IntervalMap>& family, const LbOptions& opt) {
  if (opt.n_max < 1 || opt.trials < 1) throw InvalidArgument("n_max and trials must be positive");
  const auto mats = build_all(family, opt.cells);
  const auto seqs = concatenations(family.size(), opt.trials, opt.n_max, opt.seed);
  const auto nm = static_cast<std::size_t>(opt.n_max);
  std::vector<double> mins(static_cast<std::size_t>(opt.trials) * nm);
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < opt.trials; ++t) {
    StepFunction f(opt.cells, 1.0), g(opt.cells);
    for (std::size_t n = 1; n <= nm; ++n) {
      kernels::serial::push(mats[seqs[static_cast<std::size_t>(t)][n - 1]], f.values(), g.values());
      std::swap(f, g);
      mins[static_cast<std::size_t>(t) * nm + n - 1] = f.min();
    }
  }
  std::vector<double> curve(nm, INFINITY);
  for (int t = 0; t < opt.trials; ++t) {
    for (std::size_t n = 0; n < nm; ++n) curve[n] = std::min(curve[n], mins[static_cast<std::size_t>(t) * nm + n]);
  }
  const double delta = *std::min_element(curve.begin(), curve.end());
  HypothesisReport r;
  r.kind = HypothesisKind::LB;
  r.constants = {{"delta", delta}, {"delta_min", opt.delta_min}};
  std::ostringstream os;
  os << describe_family(family) << "; N=" << opt.cells << " n_max=" << opt.n_max << " trials=" << opt.trials
     << " seed=" << opt.seed;
  r.sample = os.str();
  r.pass = delta >= opt.delta_min;
  r.curve_label = "min_density";
  r.curve = curve;
  return r;
}

HypothesisReport decay_rate(const UlamMatrix& m, const StepFunction& h, const std::vector<StepFunction>& dictionary,
                            const DecayOptions& opt) {
  const std::size_t cells = m.size();
  if (h.size() != cells) throw DimensionMismatch("density and matrix grids differ");
  if (opt.normalized && !(h.min() > 0.0)) throw DenominatorTooSmall("normalized operator needs a positive density");
  std::vector<StepFunction> start;
  for (const auto& f : dictionary) {
    if (f.size() != cells) throw DimensionMismatch("dictionary element on the wrong grid");
    StepFunction c = f;
    c += -(opt.normalized ? inner(f, h) : f.integral());
    const double bv = c.bv();
    if (bv > 1e-12 * std::max(1.0, f.bv())) start.push_back(c * (1.0 / bv));
  }
  const auto steps = static_cast<std::size_t>(opt.max_steps);
  const double floor = fit_floor(cells);
  std::vector<double> env(steps + 1, 0.0);
  std::vector<double> per(start.size() * (steps + 1), 0.0);
  const auto count = static_cast<std::int64_t>(start.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t d = 0; d < count; ++d) {
    StepFunction f = start[static_cast<std::size_t>(d)];
    StepFunction g(cells);
    double* row = &per[static_cast<std::size_t>(d) * (steps + 1)];
    row[0] = f.bv();
    for (std::size_t n = 1; n <= steps; ++n) {
      if (opt.normalized) {
        for (std::size_t i = 0; i < cells; ++i) f[i] *= h[i];
      }
      kernels::serial::push(m, f.values(), g.values());
      if (opt.normalized) {
        for (std::size_t i = 0; i < cells; ++i) g[i] /= h[i];
      }
      std::swap(f, g);
      row[n] = f.bv();
      if (row[n] <= floor * 1e-3) break;
    }
  }
  for (std::size_t d = 0; d < start.size(); ++d) {
    for (std::size_t n = 0; n <= steps; ++n) env[n] = std::max(env[n], per[d * (steps + 1) + n]);
  }
  std::size_t w = 0;
  while (w + 1 <= steps && env[w + 1] > floor) ++w;
  std::size_t last = w + 1 <= steps ? w + 1 : steps;
  env.resize(last + 1);

  double gamma = 0.0;
  if (!(env[0] > floor)) {
    gamma = 0.0;
  } else if (w == 0) {
    gamma = std::max(env.size() > 1 ? env[1] : 0.0, floor) / env[0];
  } else {
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n <= w; ++n) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(env[n]);
    }
    gamma = std::exp(fit_log_linear(xs, ys).slope);
  }
  double c1 = 0.0;
  if (gamma > 0.0) {
    for (std::size_t n = 0; n <= w; ++n) c1 = std::max(c1, env[n] / std::pow(gamma, static_cast<double>(n)));
  }
  HypothesisReport r;
  r.kind = HypothesisKind::EXA;
  r.constants = {{"C1", c1}, {"gamma0", gamma}, {"fit_window", static_cast<double>(w)},
                 {"dictionary_used", static_cast<double>(start.size())}};
  std::ostringstream os;
  os << m.descriptor() << "; N=" << cells << (opt.normalized ? " normalized" : " lebesgue-centered");
  r.sample = os.str();
  r.pass = gamma > 0.0 && gamma < 1.0 && std::isfinite(c1);
  r.curve_label = "bv_envelope";
  r.curve = std::move(env);
  return r;
}

HypothesisReport verify_lip(const IntervalMap& base, std::size_t cells, const std::vector<double>& eps_grid,
                            const std::vector<StepFunction>* dictionary, double r2_min) {
  if (eps_grid.empty()) throw InvalidArgument("eps_grid must not be empty");
  const auto dict_owned = dictionary ? std::vector<StepFunction>{} : default_dictionary(cells);
  const auto& dict = dictionary ? *dictionary : dict_owned;
  const auto m0 = build_ulam(base, cells);
  std::vector<double> dist;
  for (double e : eps_grid) {
    if (e == 0.0) {
      dist.push_back(0.0);
      continue;
    }
    dist.push_back(operator_distance(build_ulam(base.with_parameter(base.parameter() + e), cells), m0, dict));
  }
  double sxy = 0, sxx = 0, syy = 0;
  int nonzero = 0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    sxy += eps_grid[i] * dist[i];
    sxx += eps_grid[i] * eps_grid[i];
    syy += dist[i] * dist[i];
    if (eps_grid[i] != 0.0) ++nonzero;
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double ssr = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) ssr += std::pow(dist[i] - slope * eps_grid[i], 2);
  const double r2 = syy > 0.0 ? 1.0 - ssr / syy : NAN;
  double loglog = NAN;
  {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      if (eps_grid[i] > 0.0 && dist[i] > 0.0) {
        xs.push_back(std::log(eps_grid[i]));
        ys.push_back(dist[i]);
      }
    }
    if (xs.size() >= 2) loglog = fit_log_linear(xs, ys).slope;
  }
  double envelope = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (eps_grid[i] != 0.0) envelope = std::max(envelope, dist[i] / std::abs(eps_grid[i]));
  }
  HypothesisReport r;
  r.kind = HypothesisKind::LIP;
  r.constants = {{"C3", envelope}, {"slope", slope}, {"r2", r2}, {"loglog_slope", loglog}, {"r2_min", r2_min}};
  std::ostringstream os;
  os << base.descriptor() << "; N=" << cells << " eps_grid=" << eps_grid.size() << " points";
  r.sample = os.str();
  r.pass = nonzero >= 2 && slope > 0.0 && std::isfinite(r2) && r2 >= r2_min;
  r.curve_label = "distance";
  r.curve = dist;
  return r;
}

HypothesisReport verify_pos(const StepFunction& h, double h_min) {
  HypothesisReport r;
  r.kind = HypothesisKind::POS;
  const double m = h.min();
  r.constants = {{"h_min", m}, {"threshold", h_min}};
  r.sample = "invariant density on N=" + std::to_string(h.size());
  r.pass = m >= h_min;
  r.curve_label = "density";
  r.curve = h.raw();
  return r;
}

}  // namespace seqasip
