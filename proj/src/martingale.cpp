#include "seqasip/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "seqasip/container.hpp"
#include "seqasip/errors.hpp"
#include "seqasip/kernels.hpp"
#include "seqasip/orbit.hpp"

namespace seqasip {

namespace {

void require_floor(const StepFunction& d, double delta_min, std::int64_t k) {
  const double m = d.min();
  if (m < delta_min) {
    throw DenominatorTooSmall("P_" + std::to_string(k) + " 1 has a cell of " + std::to_string(m) + " < delta_min " +
                              std::to_string(delta_min));
  }
}

StepFunction divide(StepFunction f, const StepFunction& d) {
  for (std::size_t i = 0; i < f.size(); ++i) f[i] /= d[i];
  return f;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

ObservableSequence::ObservableSequence(std::vector<Observable> list) : list_(std::move(list)) {
  if (list_.empty()) throw InvalidArgument("observable sequence must not be empty");
}

const Observable& ObservableSequence::at(std::int64_t k) const {
  if (k < 1) throw InvalidArgument("observables are indexed from 1");
  if (list_.size() == 1) return list_[0];
  if (static_cast<std::size_t>(k) > list_.size()) {
    throw InvalidArgument("observable sequence has no entry " + std::to_string(k));
  }
  return list_[static_cast<std::size_t>(k - 1)];
}

bool ObservableSequence::all_zero() const {
  return std::all_of(list_.begin(), list_.end(), [](const Observable& o) { return o.is_zero(); });
}

Json ObservableSequence::to_json() const {
  if (list_.size() == 1) return list_[0].to_json();
  Json a = Json::array();
  for (const auto& o : list_) a.push_back(o.to_json());
  return a;
}

std::string to_string(DecompositionMode m) { return m == DecompositionMode::Sequential ? "sequential" : "stationary"; }

double lb_denominator_floor(const HypothesisReport& lb) {
  if (lb.kind != HypothesisKind::LB) throw InvalidArgument("denominator floor needs an LB report");
  return 0.5 * lb.constant("delta");
}

StepFunction q_apply(ChainState& state, std::int64_t k, const StepFunction& f, double delta_min) {
  if (k < 1) throw InvalidArgument("Q_k is defined for k >= 1");
  if (f.size() != state.cells()) throw DimensionMismatch("function and chain grids differ");
  const StepFunction prev = state.density(k - 1);
  const StepFunction& cur = state.density(k);
  require_floor(cur, delta_min, k);
  return divide(push_density(*state.matrix(k), hadamard(f, prev)), state.density(k));
}

DecompositionStepper::DecompositionStepper(ChainState& state, ObservableSequence observables,
                                           DecompositionOptions options)
    : state_(state), obs_(std::move(observables)), options_(std::move(options)), cells_(state.cells()) {
  step_.h = StepFunction(cells_);
  step_.h_next = StepFunction(cells_);
  if (obs_.constant()) const_grid_ = obs_.at(1).to_grid(cells_);
  if (options_.mode == DecompositionMode::Sequential) return;

  if (!state_.stationary()) throw InvalidArgument("stationary decomposition needs a frozen schedule");
  h_ = state_.density(0);
  m0_ = state_.matrix(1);
  const double drift = (push_density(*m0_, h_) - h_).l1();
  if (drift > 1e-9) {
    throw InvalidArgument("stationary decomposition needs the chain to start from an invariant density (drift " +
                          std::to_string(drift) + ")");
  }
  require_floor(h_, options_.delta_min, 0);
  if (!options_.exa) {
    DecayOptions d;
    d.normalized = true;
    options_.exa = decay_rate(*m0_, h_, default_dictionary(cells_), d);
  }
  const double gamma = options_.exa->constant("gamma0");
  const double c1 = options_.exa->constant("C1");
  if (!(gamma < 1.0)) throw NonConvergentTail("estimated contraction rate gamma0 = " + std::to_string(gamma) + " >= 1");

  double phi_bv = 0.0;
  for (std::size_t i = 1; i <= obs_.size(); ++i) {
    StepFunction g = obs_.at(static_cast<std::int64_t>(i)).to_grid(cells_);
    g += -inner(g, h_);
    phi_bv = std::max(phi_bv, g.bv());
  }
  const double tol = options_.tail_tol;
  tail_ = 0;
  if (gamma > 0.0 && c1 * phi_bv >= tol) {
    tail_ = static_cast<std::int64_t>(std::ceil(std::log(tol / (c1 * phi_bv)) / std::log(gamma)));
    const double cap = 10.0 * std::log(1.0 / tol) / std::log(1.0 / gamma);
    if (static_cast<double>(tail_) > cap) {
      throw NonConvergentTail("tail needs " + std::to_string(tail_) + " terms, more than the cap " + std::to_string(cap));
    }
  }
  if (obs_.constant()) {
    StepFunction p = *const_grid_;
    p += -inner(p, h_);
    partial_.push_back(StepFunction(cells_));
    for (std::int64_t m = 1; m <= tail_; ++m) {
      p = p_hat(p);
      partial_.push_back(partial_.back() + p);
    }
  }
}

StepFunction DecompositionStepper::phi_grid(std::int64_t k) {
  if (const_grid_) return *const_grid_;
  return obs_.at(k).to_grid(cells_);
}

StepFunction DecompositionStepper::p_hat(const StepFunction& f) const {
  return divide(push_density(*m0_, hadamard(f, h_)), h_);
}

const DecompositionStep& DecompositionStepper::next() {
  const std::int64_t k = step_.k + 1;
  StepFunction hk = k == 1 ? StepFunction(cells_) : std::move(step_.h_next);
  StepFunction phi = phi_grid(k);
  std::shared_ptr<const UlamMatrix> mnext;
  StepFunction hnext;
  double c = 0.0;
  if (options_.mode == DecompositionMode::Sequential) {
    const StepFunction dk = state_.density(k);
    c = inner(phi, dk);
    phi += -c;
    mnext = state_.matrix(k + 1);
    const StepFunction& dn = state_.density(k + 1);
    require_floor(dn, options_.delta_min, k + 1);
    hnext = divide(push_density(*mnext, hadamard(phi + hk, dk)), dn);
  } else {
    c = inner(phi, h_);
    phi += -c;
    mnext = m0_;
    if (obs_.constant()) {
      hnext = partial_[static_cast<std::size_t>(std::min<std::int64_t>(k, tail_))];
    } else {
      for (auto& t : window_) t = p_hat(t);
      if (tail_ > 0) window_.push_back(p_hat(phi));
      while (static_cast<std::int64_t>(window_.size()) > tail_) window_.pop_front();
      hnext = StepFunction(cells_);
      for (const auto& t : window_) hnext += t;
    }
  }
  StepFunction psi = phi + hk;
  psi -= pull_function(*mnext, hnext);

  step_.k = k;
  step_.centering = c;
  step_.phi_tilde = std::move(phi);
  step_.h = std::move(hk);
  step_.h_next = std::move(hnext);
  step_.psi = std::move(psi);
  return step_;
}

Decomposition build_decomposition(ChainState& state, const ObservableSequence& observables, std::int64_t n_max,
                                  DecompositionOptions options) {
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  Decomposition d;
  d.mode = options.mode;
  d.n_max = n_max;
  d.cells = state.cells();
  DecompositionStepper stepper(state, observables, std::move(options));
  d.tail_truncation = stepper.tail_truncation();
  const auto n = static_cast<std::size_t>(n_max);
  d.centering.assign(n + 1, 0.0);
  d.phi_tilde.assign(n + 1, StepFunction(d.cells));
  d.psi.assign(n + 1, StepFunction(d.cells));
  d.h.assign(n + 2, StepFunction(d.cells));
  for (std::size_t k = 1; k <= n; ++k) {
    const auto& s = stepper.next();
    d.centering[k] = s.centering;
    d.phi_tilde[k] = s.phi_tilde;
    d.h[k] = s.h;
    d.h[k + 1] = s.h_next;
    d.psi[k] = s.psi;
  }
  for (std::size_t k = 1; k < d.h.size(); ++k) {
    d.sup_h_bv = std::max(d.sup_h_bv, d.h[k].bv());
    d.sup_h_sup = std::max(d.sup_h_sup, d.h[k].sup());
  }
  return d;
}

std::vector<double> check_reverse_martingale(const Decomposition& dec, ChainState& state, double delta_min) {
  if (dec.cells != state.cells()) throw DimensionMismatch("decomposition and chain grids differ");
  std::vector<double> out;
  for (std::int64_t k = 1; k <= dec.n_max; ++k) out.push_back(q_apply(state, k + 1, dec.psi_at(k), delta_min).l1());
  return out;
}

ConditionalVariance conditional_variance_function(const StepFunction& psi, ChainState& state, std::int64_t k,
                                                  double delta_min) {
  const StepFunction sq = hadamard(psi, psi);
  const StepFunction& dk = state.density(k);
  ConditionalVariance cv;
  cv.second_moment = inner(sq, dk);
  cv.fourth_moment = inner(hadamard(sq, sq), dk);
  cv.g = q_apply(state, k + 1, sq, delta_min);
  return cv;
}

ConditionalVariance conditional_variance_function(const Decomposition& dec, ChainState& state, std::int64_t k,
                                                  double delta_min) {
  return conditional_variance_function(dec.psi_at(k), state, k, delta_min);
}

std::vector<double> increments_along(const Decomposition& dec, const ObservableSequence& observables,
                                     std::span<const double> orbit) {
  (void)observables;
  const auto n = static_cast<std::size_t>(dec.n_max);
  if (orbit.size() < n + 2) throw InvalidArgument("orbit must hold T_0 x .. T_{n+1} x");
  std::vector<double> u(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    u[j] = dec.phi_tilde[j].at(orbit[j]) + dec.h[j].at(orbit[j]) - dec.h[j + 1].at(orbit[j + 1]);
  }
  return u;
}

CmDiagnostics cm_diagnostics(ChainState& state, const ObservableSequence& observables,
                             const DecompositionOptions& decomposition, std::int64_t n_max, const CmOptions& opt) {
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  CmDiagnostics out;
  out.a_exponent = opt.a_exponent;
  out.checkpoints = opt.checkpoints;
  if (out.checkpoints.empty()) {
    for (std::int64_t n = 1; n <= n_max; n *= 2) out.checkpoints.push_back(n);
  }
  const std::size_t nc = out.checkpoints.size();
  for (std::size_t c = 0; c < nc; ++c) {
    if (out.checkpoints[c] < 1 || out.checkpoints[c] > n_max || (c > 0 && out.checkpoints[c] <= out.checkpoints[c - 1])) {
      throw InvalidArgument("checkpoints must increase inside [1, n_max]");
    }
  }

  // Walkers start at T_0 x and are kept one step ahead, at T_{k+1} x.
  const std::size_t ns = opt.sample_points.empty() ? opt.samples : opt.sample_points.size();
  if (ns == 0) throw InvalidArgument("cm_diagnostics needs at least one sample point");
  out.samples = ns;
  std::vector<Stream> rngs;
  std::vector<OrbitWalker> walkers(ns);
  rngs.reserve(ns);
  const StepFunction start = state.density(0);
  const bool uniform_start = start == StepFunction(start.size(), 1.0);
  std::optional<DensitySampler> sampler;
  if (!uniform_start) sampler.emplace(start);
  for (std::size_t s = 0; s < ns; ++s) {
    rngs.emplace_back(opt.seed, s);
    if (!opt.sample_points.empty()) {
      walkers[s].start_at(opt.sample_points[s]);
    } else if (uniform_start) {
      walkers[s].start_uniform(rngs[s]);
    } else {
      walkers[s].start_at((*sampler)(rngs[s]));
    }
  }

  DecompositionStepper stepper(state, observables, decomposition);
  std::vector<double> acc(ns, 0.0);
  out.trajectories.assign(ns * nc, 0.0);
  out.a.assign(nc, 0.0);
  out.b_running.reserve(static_cast<std::size_t>(n_max));
  out.second_moments.reserve(static_cast<std::size_t>(n_max));
  double b = 0.0;
  double var_sum = 0.0;
  std::size_t c = 0;
  for (std::int64_t j = 1; j <= 2; ++j) {
    const IntervalMap mj = state.map(j);
    const MapStepper st(mj);
    for (std::size_t s = 0; s < ns; ++s) walkers[s].step(st, rngs[s]);
  }
  const auto sn = static_cast<std::int64_t>(ns);
  for (std::int64_t k = 1; k <= n_max; ++k) {
    const auto& step = stepper.next();
    const auto cv = conditional_variance_function(step.psi, state, k, stepper.delta_min());
    const double e2 = cv.second_moment;
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < sn; ++s) acc[static_cast<std::size_t>(s)] += cv.g.at(walkers[static_cast<std::size_t>(s)].position()) - e2;
    var_sum += e2;
    out.second_moments.push_back(e2);
    const double a = opt.a_from_variance ? std::pow(var_sum, 0.5 * opt.a_exponent)
                                         : std::pow(static_cast<double>(k), opt.a_exponent);
    if (a > 0.0) b += cv.fourth_moment / (a * a);
    out.b_running.push_back(b);
    if (c < nc && out.checkpoints[c] == k) {
      out.a[c] = a;
      for (std::size_t s = 0; s < ns; ++s) out.trajectories[s * nc + c] = acc[s];
      ++c;
    }
    if (k < n_max) {
      const IntervalMap mk = state.map(k + 2);
      const MapStepper st(mk);
#pragma omp parallel for schedule(static)
      for (std::int64_t s = 0; s < sn; ++s) {
        walkers[static_cast<std::size_t>(s)].step(st, rngs[static_cast<std::size_t>(s)]);
      }
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    std::vector<double> r(ns);
    for (std::size_t s = 0; s < ns; ++s) r[s] = out.a[j] > 0.0 ? std::abs(out.trajectories[s * nc + j]) / out.a[j] : 0.0;
    out.max_ratio.push_back(*std::max_element(r.begin(), r.end()));
    out.median_ratio.push_back(median(std::move(r)));
    out.b_partial.push_back(out.b_running[static_cast<std::size_t>(out.checkpoints[j] - 1)]);
  }
  return out;
}

void save_decomposition(const Decomposition& dec, const std::filesystem::path& path) {
  ByteWriter w;
  for (std::size_t k = 1; k < dec.centering.size(); ++k) w.f64(dec.centering[k]);
  for (std::size_t k = 1; k < dec.phi_tilde.size(); ++k) w.f64s(dec.phi_tilde[k].values());
  for (std::size_t k = 1; k < dec.h.size(); ++k) w.f64s(dec.h[k].values());
  for (std::size_t k = 1; k < dec.psi.size(); ++k) w.f64s(dec.psi[k].values());
  Json h{{"kind", "decomposition"},  {"mode", to_string(dec.mode)}, {"n_max", dec.n_max},
         {"N", dec.cells},           {"tail_truncation", dec.tail_truncation},
         {"sup_h_bv", dec.sup_h_bv}, {"sup_h_sup", dec.sup_h_sup}};
  write_container(path, std::move(h), w.bytes());
}

Decomposition load_decomposition(const std::filesystem::path& path) {
  const auto c = read_container(path);
  try {
    const auto& h = c.header;
    if (h.at("kind") != "decomposition") throw CacheCorrupt(path.string() + ": not a decomposition container");
    Decomposition d;
    d.mode = h.at("mode") == "sequential" ? DecompositionMode::Sequential : DecompositionMode::Stationary;
    d.n_max = h.at("n_max").get<std::int64_t>();
    d.cells = h.at("N").get<std::size_t>();
    d.tail_truncation = h.at("tail_truncation").get<std::int64_t>();
    d.sup_h_bv = h.at("sup_h_bv").get<double>();
    d.sup_h_sup = h.at("sup_h_sup").get<double>();
    const auto n = static_cast<std::size_t>(d.n_max);
    ByteReader r(c.payload);
    d.centering.assign(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) d.centering[k] = r.f64();
    d.phi_tilde.assign(n + 1, StepFunction(d.cells));
    for (std::size_t k = 1; k <= n; ++k) d.phi_tilde[k] = StepFunction(r.f64s(d.cells));
    d.h.assign(n + 2, StepFunction(d.cells));
    for (std::size_t k = 1; k <= n + 1; ++k) d.h[k] = StepFunction(r.f64s(d.cells));
    d.psi.assign(n + 1, StepFunction(d.cells));
    for (std::size_t k = 1; k <= n; ++k) d.psi[k] = StepFunction(r.f64s(d.cells));
    if (!r.done()) throw CacheCorrupt(path.string() + ": trailing payload bytes");
    return d;
  } catch (const Json::exception& e) {
    throw CacheCorrupt(path.string() + ": bad header field (" + std::string(e.what()) + ")");
  }
}

}  // namespace seqasip
