#include "seqasip/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "seqasip/chain.hpp"
#include "seqasip/container.hpp"
#include "seqasip/errors.hpp"
#include "seqasip/hypothesis.hpp"
#include "seqasip/martingale.hpp"
#include "seqasip/report.hpp"
#include "seqasip/stats.hpp"
#include "seqasip/version.hpp"

namespace seqasip {

namespace fs = std::filesystem;

namespace {

const Json kDoubling = {{"kind", "linear_noise"}, {"parameters", {{"a", 2}, {"eps", 0.0}}}};
const Json kBetaFamily = {{"kind", "beta"}, {"parameters", {{"beta", 2.0}}}};
const Json kCos = {{"kind", "trig"}, {"frequency", 1.0}, {"phase", 0.0}, {"centered", true}};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class T>
T get(const Json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("config key '" + key + "' has the wrong type (" + cfg.at(key).dump() + ")");
  }
}

std::int64_t positive(const Json& cfg, const std::string& key) {
  const auto v = get<std::int64_t>(cfg, key);
  if (v < 1) throw InvalidArgument("config key '" + key + "' must be >= 1");
  return v;
}

double number(const Json& cfg, const std::string& key) { return get<double>(cfg, key); }

std::vector<std::int64_t> checkpoints_for(const Json& cfg, std::int64_t n_max) {
  const auto per = static_cast<int>(positive(cfg, "per_octave"));
  return geometric_checkpoints(std::min<std::int64_t>(64, n_max), n_max, per);
}

/// Collects the files of one run and writes the manifest last.
class Run {
 public:
  Run(const Json& config, fs::path out) : config_(config), out_(std::move(out)), start_(utc_now()) {
    fs::create_directories(out_);
    const std::string cache = get<std::string>(config, "cache");
    if (!cache.empty()) cache_ = std::make_unique<MatrixCache>(cache);
  }

  MatrixCache* cache() { return cache_.get(); }
  std::uint64_t seed() const { return get<std::uint64_t>(config_, "seed"); }

  std::shared_ptr<const UlamMatrix> matrix(const IntervalMap& map, std::size_t cells) {
    if (cache_) return cache_->get(map, cells);
    return std::make_shared<const UlamMatrix>(build_ulam(map, cells));
  }

  void csv(const std::string& name, const CsvTable& t) { file(name, to_csv(t)); }
  void plot(const std::string& name, const PlotSpec& spec) { file(name, gnuplot_script(spec)); }
  void json(const std::string& name, const Json& results) {
    file(name, sidecar(config_, seed(), results).dump(2) + "\n");
  }
  /// Records a file written directly into the output directory.
  void attach(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }
  const fs::path& out() const { return out_; }
  void hypothesis(const HypothesisReport& r) {
    reports_.push_back(r.to_json());
    pass_ = pass_ && r.pass;
  }

  RunResult finish() {
    Json files = Json::array();
    for (const auto& name : files_) {
      files.push_back({{"name", name}, {"hash", file_hash(out_ / name)}, {"bytes", fs::file_size(out_ / name)}});
    }
    Json inputs = Json::array();
    if (cache_) {
      for (const auto& [name, sum] : cache_->touched()) inputs.push_back({{"file", name}, {"checksum", hex64(sum)}});
    }
    Json m = {{"config", config_},         {"version", kVersion}, {"git_hash", kGitHash},
              {"start", start_},           {"end", utc_now()},    {"cache_dir", get<std::string>(config_, "cache")},
              {"cache_inputs", inputs},    {"files", files},      {"hypothesis_reports", reports_},
              {"pass", pass_}};
    write_text_atomic(out_ / "manifest.json", m.dump(2) + "\n");
    return {m, pass_};
  }

 private:
  void file(const std::string& name, const std::string& text) {
    write_text_atomic(out_ / name, text);
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }

  Json config_;
  fs::path out_;
  std::string start_;
  std::unique_ptr<MatrixCache> cache_;
  std::vector<std::string> files_;
  Json reports_ = Json::array();
  bool pass_ = true;
};

SequentialSystem system_of(const Json& cfg, std::int64_t horizon) {
  return SequentialSystem::from_json(cfg.at("system"), std::max<std::int64_t>(horizon, 1) + 16);
}

ObservableSequence observable_of(const Json& cfg) { return ObservableSequence::constant(Observable::from_json(cfg.at("observable"))); }

std::vector<IntervalMap> family_of(const Json& cfg) {
  const IntervalMap base = IntervalMap::from_json(cfg.at("system"));
  const auto params = get<std::vector<double>>(cfg, "family_parameters");
  if (params.empty()) throw InvalidArgument("config key 'family_parameters' must not be empty");
  std::vector<IntervalMap> fam;
  for (double p : params) fam.push_back(base.with_parameter(p));
  return fam;
}

void curve_csv(Run& run, const std::string& stem, const HypothesisReport& r, const std::string& x, bool log_y,
               const std::vector<double>* xs = nullptr) {
  CsvTable t{{x, r.curve_label}, {}};
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    t.add({xs ? CsvCell((*xs)[i]) : CsvCell(static_cast<std::int64_t>(i + 1)), r.curve[i]});
  }
  run.csv(stem + ".csv", t);
  run.plot(stem + ".gp", {stem, stem + ".csv", 1, {2}, {r.curve_label}, x, r.curve_label, xs != nullptr, log_y});
  run.json(stem + ".json", r.to_json());
  run.hypothesis(r);
}

// Invariant density of the limit map, or nullopt when it is Lebesgue.
struct Stationary {
  std::shared_ptr<const UlamMatrix> m;
  StepFunction h;
  bool lebesgue;
};

Stationary stationary_of(Run& run, const SequentialSystem& sys, std::size_t cells) {
  auto m = run.matrix(sys.limit_map(), cells);
  StepFunction h = invariant_density(*m).density;
  const bool leb = h == StepFunction(cells, 1.0);
  return {m, std::move(h), leb};
}

void run_ulam(Run& run, const Json& cfg) {
  const auto cells = static_cast<std::size_t>(positive(cfg, "N"));
  const auto sys = system_of(cfg, 1);
  auto m = run.matrix(sys.limit_map(), cells);
  const auto inv = invariant_density(*m);
  CsvTable t{{"cell", "x_left", "density"}, {}};
  for (std::size_t i = 0; i < cells; ++i) {
    t.add({static_cast<std::int64_t>(i), static_cast<double>(i) / static_cast<double>(cells), inv.density[i]});
  }
  run.csv("ulam.csv", t);
  run.plot("ulam.gp", {"invariant density", "ulam.csv", 2, {3}, {"density"}, "x", "h", false, false});
  const auto pos = verify_pos(inv.density, number(cfg, "h_min"));
  run.hypothesis(pos);
  run.json("ulam.json", {{"matrix_checksum", hex64(m->checksum())},
                         {"nonzeros", m->nonzeros()},
                         {"residual", inv.residual},
                         {"iterations", inv.iterations},
                         {"pos", pos.to_json()}});
}

void run_dfly(Run& run, const Json& cfg) {
  DflyOptions o;
  o.cells = static_cast<std::size_t>(positive(cfg, "N"));
  o.n_max = static_cast<int>(positive(cfg, "n_max"));
  o.trials = static_cast<int>(positive(cfg, "trials"));
  o.seed = run.seed();
  curve_csv(run, "verify-dfly", verify_dfly(family_of(cfg), o), "n", true);
}

void run_lb(Run& run, const Json& cfg) {
  LbOptions o;
  o.cells = static_cast<std::size_t>(positive(cfg, "N"));
  o.n_max = static_cast<int>(positive(cfg, "n_max"));
  o.trials = static_cast<int>(positive(cfg, "trials"));
  o.seed = run.seed();
  o.delta_min = number(cfg, "delta_min");
  curve_csv(run, "verify-lb", verify_lb(family_of(cfg), o), "n", false);
}

void run_lip(Run& run, const Json& cfg) {
  const auto eps = get<std::vector<double>>(cfg, "eps_grid");
  const auto r = verify_lip(IntervalMap::from_json(cfg.at("system")), static_cast<std::size_t>(positive(cfg, "N")), eps,
                            nullptr, number(cfg, "r2_min"));
  curve_csv(run, "verify-lip", r, "eps", true, &eps);
}

void run_decay(Run& run, const Json& cfg) {
  const auto cells = static_cast<std::size_t>(positive(cfg, "N"));
  const auto sys = system_of(cfg, 1);
  DecayOptions o;
  o.normalized = get<bool>(cfg, "normalized");
  o.max_steps = static_cast<int>(positive(cfg, "n_max"));
  auto st = stationary_of(run, sys, cells);
  if (!o.normalized) st.h = StepFunction(cells, 1.0);
  curve_csv(run, "decay", decay_rate(*st.m, st.h, default_dictionary(cells), o), "n", true);
}

DecompositionOptions decomposition_options(const Json& cfg, const SequentialSystem& sys) {
  DecompositionOptions o;
  const auto mode = get<std::string>(cfg, "mode");
  if (mode == "stationary" || (mode == "auto" && sys.stationary())) {
    o.mode = DecompositionMode::Stationary;
  } else if (mode == "sequential" || mode == "auto") {
    o.mode = DecompositionMode::Sequential;
  } else {
    throw InvalidArgument("config key 'mode' must be auto, sequential or stationary (got '" + mode + "')");
  }
  o.delta_min = number(cfg, "delta_min");
  o.tail_tol = number(cfg, "tail_tol");
  return o;
}

ChainOptions chain_options(Run& run, const DecompositionOptions& d, const SequentialSystem& sys, std::size_t cells,
                           bool history) {
  ChainOptions co;
  co.cache = run.cache();
  co.keep_history = history;
  if (d.mode == DecompositionMode::Stationary) co.initial = stationary_of(run, sys, cells).h;
  return co;
}

void run_decompose(Run& run, const Json& cfg) {
  const auto cells = static_cast<std::size_t>(positive(cfg, "N"));
  const auto n = positive(cfg, "n_max");
  const auto sys = system_of(cfg, n + 1);
  const auto obs = observable_of(cfg);
  const auto d = decomposition_options(cfg, sys);
  ChainState state(sys, cells, chain_options(run, d, sys, cells, true));
  const auto dec = build_decomposition(state, obs, n, d);
  const auto residual = check_reverse_martingale(dec, state, d.delta_min);
  CsvTable t{{"k", "centering", "reverse_martingale_residual", "second_moment", "h_sup", "h_bv"}, {}};
  for (std::int64_t k = 1; k <= n; ++k) {
    const auto cv = conditional_variance_function(dec, state, k, d.delta_min);
    const auto& h = dec.h_at(k);
    t.add({k, dec.centering[static_cast<std::size_t>(k)], residual[static_cast<std::size_t>(k - 1)], cv.second_moment,
           h.sup(), h.bv()});
  }
  run.csv("decompose.csv", t);
  run.plot("decompose.gp", {"reverse martingale residual", "decompose.csv", 1, {3}, {"||Q psi||_1"}, "k", "residual",
                            false, true});
  save_decomposition(dec, run.out() / "decomposition.bin");
  run.attach("decomposition.bin");
  const double worst = residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
  run.json("decompose.json", {{"mode", to_string(dec.mode)},
                              {"tail_truncation", dec.tail_truncation},
                              {"max_residual", worst},
                              {"sup_h_bv", dec.sup_h_bv},
                              {"sup_h_sup", dec.sup_h_sup}});
}

void run_cm(Run& run, const Json& cfg) {
  const auto cells = static_cast<std::size_t>(positive(cfg, "N"));
  const auto n = positive(cfg, "n_max");
  const auto sys = system_of(cfg, n + 2);
  const auto d = decomposition_options(cfg, sys);
  ChainState state(sys, cells, chain_options(run, d, sys, cells, false));
  CmOptions o;
  o.a_exponent = number(cfg, "a_exponent");
  o.a_from_variance = get<bool>(cfg, "a_from_variance");
  o.samples = static_cast<std::size_t>(positive(cfg, "M"));
  o.seed = run.seed();
  const auto cm = cm_diagnostics(state, observable_of(cfg), d, n, o);
  CsvTable t{{"n", "median_A_ratio", "max_A_ratio", "B_partial_sum"}, {}};
  for (std::size_t c = 0; c < cm.checkpoints.size(); ++c) {
    t.add({cm.checkpoints[c], cm.median_ratio[c], cm.max_ratio[c], cm.b_partial[c]});
  }
  run.csv("cm-diagnostics.csv", t);
  run.plot("cm-diagnostics.gp", {"conditions A and B", "cm-diagnostics.csv", 1, {2, 3, 4},
                                 {"median |S_n|/a_n", "max |S_n|/a_n", "B partial sum"}, "n", "", true, true});
  run.json("cm-diagnostics.json", {{"a_exponent", cm.a_exponent}, {"samples", cm.samples}, {"v", cm.v}});
}

EnsembleResult ensemble_of(Run& run, const Json& cfg, const std::vector<std::int64_t>& cps) {
  EnsembleSpec spec;
  spec.n_max = positive(cfg, "n_max");
  spec.samples = static_cast<std::size_t>(positive(cfg, "M"));
  spec.seed = run.seed();
  spec.checkpoints = cps;
  const auto source = get<std::string>(cfg, "source");
  if (source == "iid_normal") return ensemble_gaussian(spec);
  if (source != "orbit") throw InvalidArgument("config key 'source' must be orbit or iid_normal (got '" + source + "')");
  const auto sys = system_of(cfg, spec.n_max);
  const auto obs = observable_of(cfg);
  const auto cells = static_cast<std::size_t>(positive(cfg, "N"));
  std::vector<double> centering;
  if (sys.stationary()) {
    const auto st = stationary_of(run, sys, cells);
    if (!st.lebesgue) spec.initial_density = st.h;
    centering = stationary_centering(obs, st.h, spec.n_max);
  } else {
    centering = sequential_centering(sys, obs, spec.n_max, cells);
  }
  return ensemble_birkhoff(sys, obs, centering, spec);
}

Json clt_json(const CltReport& r) {
  return {{"n", r.n}, {"samples", r.samples}, {"ks_statistic", r.ks_statistic}, {"p_value", r.p_value},
          {"mean", r.mean}, {"sd", r.sd}, {"skewness", r.skewness}};
}

void clt_row(CsvTable& t, const CltReport& r) {
  t.add({r.n, static_cast<std::int64_t>(r.samples), r.ks_statistic, r.p_value, r.mean, r.sd, r.skewness});
}

const std::vector<std::string> kCltHeader = {"n", "samples", "ks_statistic", "p_value", "mean_z", "sd", "skewness"};

void run_clt(Run& run, const Json& cfg) {
  const auto n = positive(cfg, "n_max");
  const auto ens = ensemble_of(run, cfg, checkpoints_for(cfg, n));
  CltOptions o;
  o.jitter = get<bool>(cfg, "jitter");
  o.seed = run.seed();
  CsvTable t{kCltHeader, {}};
  Json all = Json::array();
  for (auto c : ens.checkpoints) {
    const auto r = clt_test(ens, c, o);
    clt_row(t, r);
    all.push_back(clt_json(r));
  }
  run.csv("clt.csv", t);
  run.plot("clt.gp", {"KS p-value", "clt.csv", 1, {4}, {"p"}, "n", "p", true, false});
  run.json("clt.json", {{"checkpoints", all}, {"final", all.back()}});
}

void run_variance(Run& run, const Json& cfg) {
  const auto n = positive(cfg, "n_max");
  const auto ens = ensemble_of(run, cfg, checkpoints_for(cfg, n));
  const auto vc = variance_curve(ens, static_cast<int>(get<std::int64_t>(cfg, "bootstrap")), run.seed());
  CsvTable t{{"n", "variance", "standard_error"}, {}};
  for (std::size_t c = 0; c < vc.checkpoints.size(); ++c) t.add({vc.checkpoints[c], vc.variance[c], vc.standard_error[c]});
  run.csv("variance.csv", t);
  run.plot("variance.gp", {"ensemble variance", "variance.csv", 1, {2}, {"sigma_n^2"}, "n", "variance", true, true});
  run.json("variance.json", {{"exponent", vc.exponent}, {"ci_low", vc.ci_low}, {"ci_high", vc.ci_high},
                             {"fit_points", vc.fit_points}, {"bootstrap", vc.bootstrap}});
}

void run_lil(Run& run, const Json& cfg) {
  const auto n = positive(cfg, "n_max");
  const auto ens = ensemble_of(run, cfg, checkpoints_for(cfg, n));
  const auto r = lil_profile(ens, static_cast<int>(positive(cfg, "window_octaves")));
  CsvTable t{{"n", "variance"}, {}};
  for (std::size_t c = 0; c < r.checkpoints.size(); ++c) t.add({r.checkpoints[c], r.sigma2[c]});
  run.csv("lil.csv", t);
  CsvTable s{{"sample", "windowed_sup"}, {}};
  for (std::size_t i = 0; i < r.windowed_sup.size(); ++i) s.add({static_cast<std::int64_t>(i), r.windowed_sup[i]});
  run.csv("lil-sup.csv", s);
  run.plot("lil.gp", {"ensemble variance", "lil.csv", 1, {2}, {"sigma_n^2"}, "n", "variance", true, true});
  run.json("lil.json", {{"median", r.median}, {"q05", r.q05}, {"q95", r.q95}, {"window_start", r.window_start},
                        {"window_octaves", r.window_octaves}});
}

void run_green_kubo(Run& run, const Json& cfg) {
  const auto cells = static_cast<std::size_t>(positive(cfg, "N"));
  const auto sys = system_of(cfg, 1);
  if (!sys.stationary()) throw InvalidArgument("green-kubo needs a frozen schedule");
  const auto st = stationary_of(run, sys, cells);
  const auto phi = Observable::from_json(cfg.at("observable"));
  DecayOptions d;
  d.normalized = true;
  const auto exa = decay_rate(*st.m, st.h, default_dictionary(cells), d);
  run.hypothesis(exa);
  const auto gk = green_kubo_variance(*st.m, st.h, phi, number(cfg, "tail_tol"), &exa);
  Json res = {{"sigma2", gk.sigma2}, {"terms", gk.terms}, {"removed_mean", gk.removed_mean},
              {"tail_bound", gk.tail_bound}, {"exa", exa.to_json()}};
  CsvTable t{{"quantity", "value", "standard_error"}, {}};
  t.add({std::string("sigma2_green_kubo"), gk.sigma2, 0.0});
  const auto m = get<std::int64_t>(cfg, "M");
  if (m > 0) {
    const auto n = positive(cfg, "n_max");
    EnsembleSpec spec;
    spec.n_max = n;
    spec.samples = static_cast<std::size_t>(m);
    spec.seed = run.seed();
    spec.checkpoints = {n};
    if (!st.lebesgue) spec.initial_density = st.h;
    const auto ens = ensemble_birkhoff(sys, observable_of(cfg), std::vector<double>(static_cast<std::size_t>(n), gk.removed_mean), spec);
    const auto col = ens.column(0);
    const double var = sample_variance(col);
    double m4 = 0.0;
    const double mean = sample_mean(col);
    for (double x : col) m4 += std::pow(x - mean, 4);
    m4 /= static_cast<double>(m);
    const double md = static_cast<double>(m);
    const double se = std::sqrt(std::max(0.0, (m4 - (md - 3.0) / (md - 1.0) * var * var) / md)) / static_cast<double>(n);
    t.add({std::string("sigma2_monte_carlo"), var / static_cast<double>(n), se});
    res["monte_carlo"] = {{"n", n}, {"samples", m}, {"sigma2_over_n", var / static_cast<double>(n)}, {"standard_error", se}};
  }
  run.csv("green-kubo.csv", t);
  run.json("green-kubo.json", res);
}

void run_shrinking(Run& run, const Json& cfg) {
  ShrinkingTargetSpec spec;
  spec.n_max = positive(cfg, "n_max");
  spec.samples = static_cast<std::size_t>(positive(cfg, "M"));
  spec.seed = run.seed();
  spec.cells = static_cast<std::size_t>(positive(cfg, "N"));
  spec.targets = TargetSequence::from_json(cfg.at("targets"));
  spec.checkpoints = checkpoints_for(cfg, spec.n_max);
  spec.bootstrap = static_cast<int>(get<std::int64_t>(cfg, "bootstrap"));
  spec.jitter = get<bool>(cfg, "jitter");
  const auto r = shrinking_target(system_of(cfg, spec.n_max), spec);
  CsvTable t{{"n", "expected_hits", "mean_hits", "variance", "standard_error"}, {}};
  for (std::size_t c = 0; c < r.hits.checkpoints.size(); ++c) {
    t.add({r.hits.checkpoints[c], r.expected[c], r.mean_hits[c], r.variance ? r.variance->variance[c] : 0.0,
           r.variance ? r.variance->standard_error[c] : 0.0});
  }
  run.csv("shrinking-target.csv", t);
  run.plot("shrinking-target.gp", {"hit counts", "shrinking-target.csv", 1, {2, 3, 4},
                                   {"E_n", "mean hits", "variance"}, "n", "", true, true});
  Json res = {{"gamma_warning", r.warning}, {"exponent", nullptr}, {"clt", nullptr}};
  if (r.variance) res.update({{"exponent", r.variance->exponent}, {"ci_low", r.variance->ci_low}, {"ci_high", r.variance->ci_high}});
  if (r.clt) res["clt"] = clt_json(*r.clt);
  run.json("shrinking-target.json", res);
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k = {"ulam", "verify-dfly", "verify-lb", "verify-lip", "decay", "decompose",
                                             "cm-diagnostics", "clt", "lil", "variance", "green-kubo", "shrinking-target"};
  return k;
}

Json default_config(const std::string& kind) {
  Json c = {{"experiment", kind}, {"seed", 1}, {"out", "out"}, {"cache", ""}};
  if (kind == "ulam") {
    c.update({{"system", kDoubling}, {"N", 1024}, {"h_min", 1e-3}});
  } else if (kind == "verify-dfly" || kind == "verify-lb") {
    c.update({{"system", kBetaFamily}, {"family_parameters", {1.8, 1.9, 2.0, 2.1, 2.2}}, {"N", 1024}, {"trials", 20}});
    if (kind == "verify-dfly") {
      c["n_max"] = 40;
    } else {
      c.update({{"n_max", 50}, {"delta_min", 1e-3}});
    }
  } else if (kind == "verify-lip") {
    c.update({{"system", kBetaFamily}, {"N", 4096}, {"eps_grid", {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1}}, {"r2_min", 0.95}});
  } else if (kind == "decay") {
    c.update({{"system", kDoubling}, {"N", 1024}, {"n_max", 400}, {"normalized", false}});
  } else if (kind == "decompose" || kind == "cm-diagnostics") {
    c.update({{"system", kDoubling}, {"observable", kCos}, {"N", 4096}, {"mode", "auto"}, {"delta_min", 5e-4},
              {"tail_tol", 1e-10}});
    if (kind == "decompose") {
      c["n_max"] = 64;
    } else {
      c.update({{"n_max", 16384}, {"M", 64}, {"a_exponent", 0.75}, {"a_from_variance", false}});
    }
  } else if (kind == "clt" || kind == "lil" || kind == "variance") {
    c.update({{"system", kDoubling}, {"observable", kCos}, {"N", 4096}, {"n_max", 8192}, {"M", 10000},
              {"source", "orbit"}, {"per_octave", 1}});
    if (kind == "clt") c["jitter"] = false;
    if (kind == "lil") c.update({{"n_max", 1 << 20}, {"M", 1000}, {"per_octave", 4}, {"window_octaves", 10}});
    if (kind == "variance") c["bootstrap"] = 1000;
  } else if (kind == "green-kubo") {
    c.update({{"system", kDoubling}, {"observable", kCos}, {"N", 4096}, {"tail_tol", 1e-10}, {"M", 0}, {"n_max", 16384}});
  } else if (kind == "shrinking-target") {
    c.update({{"system", kDoubling}, {"targets", {{"gamma", 0.5}, {"scale", 1.0}, {"anchor", 0.0}}}, {"N", 1024},
              {"n_max", 65536}, {"M", 100000}, {"per_octave", 1}, {"bootstrap", 1000}, {"jitter", true}});
  } else {
    throw InvalidArgument("unknown experiment kind '" + kind + "'");
  }
  return c;
}

Json resolve_config(const std::string& kind, const Json& overrides) {
  Json c = default_config(kind);
  if (!overrides.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (!c.contains(key)) throw InvalidArgument("unknown config key '" + key + "' for experiment " + kind);
    if (key == "experiment" && value != kind) {
      throw InvalidArgument("config key 'experiment' is '" + value.dump() + "' but the command is " + kind);
    }
    c[key] = value;
  }
  // parse nested descriptors now so that errors surface before any computation
  if (c.contains("system")) {
    try {
      (void)SequentialSystem::from_json(c.at("system"), 1);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(std::string("config key 'system': ") + e.what());
    }
  }
  if (c.contains("observable")) {
    try {
      (void)Observable::from_json(c.at("observable"));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(std::string("config key 'observable': ") + e.what());
    }
  }
  if (c.contains("targets")) {
    try {
      (void)TargetSequence::from_json(c.at("targets"));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(std::string("config key 'targets': ") + e.what());
    }
  }
  for (const char* key : {"N", "n_max", "M", "trials", "per_octave", "window_octaves", "bootstrap"}) {
    if (c.contains(key) && !c.at(key).is_number_integer()) throw InvalidArgument(std::string("config key '") + key + "' must be an integer");
  }
  const Json& seed = c.at("seed");
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw InvalidArgument("config key 'seed' must be an unsigned integer");
  return c;
}

void apply_assignment(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects KEY=VALUE (got '" + assignment + "')");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InvalidArgument("empty key segment in '" + path + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunResult run_experiment(const Json& raw) {
  if (!raw.is_object() || !raw.contains("experiment") || !raw.at("experiment").is_string()) {
    throw InvalidArgument("config key 'experiment' is required");
  }
  const std::string kind = raw.at("experiment").get<std::string>();
  const Json cfg = resolve_config(kind, raw);
  Run run(cfg, get<std::string>(cfg, "out"));
  static const std::map<std::string, void (*)(Run&, const Json&)> dispatch = {
      {"ulam", run_ulam},         {"verify-dfly", run_dfly},     {"verify-lb", run_lb},
      {"verify-lip", run_lip},    {"decay", run_decay},          {"decompose", run_decompose},
      {"cm-diagnostics", run_cm}, {"clt", run_clt},              {"lil", run_lil},
      {"variance", run_variance}, {"green-kubo", run_green_kubo}, {"shrinking-target", run_shrinking}};
  dispatch.at(kind)(run, cfg);
  return run.finish();
}

std::vector<std::string> cache_gc(const fs::path& cache_dir, std::uintmax_t max_bytes, const fs::path& manifest_root) {
  if (!fs::is_directory(cache_dir)) throw InvalidArgument("cache directory " + cache_dir.string() + " does not exist");
  const fs::path root = manifest_root.empty() ? fs::absolute(cache_dir).parent_path() : manifest_root;
  std::set<std::string> pinned;
  if (fs::is_directory(root)) {
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file() || it->path().filename() != "manifest.json") continue;
      const Json m = Json::parse(read_text(it->path()), nullptr, false);
      if (m.is_discarded() || !m.contains("cache_inputs")) continue;
      for (const auto& in : m.at("cache_inputs")) {
        if (in.contains("file") && in.at("file").is_string()) pinned.insert(in.at("file").get<std::string>());
      }
    }
  }
  struct Entry {
    fs::path path;
    std::uintmax_t bytes;
    fs::file_time_type atime;
  };
  std::vector<Entry> entries;
  std::uintmax_t total = 0;
  for (const auto& e : fs::directory_iterator(cache_dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".bin") continue;
    entries.push_back({e.path(), e.file_size(), e.last_write_time()});
    total += entries.back().bytes;
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.atime != b.atime ? a.atime < b.atime : a.path.filename() < b.path.filename();
  });
  std::vector<std::string> evicted;
  for (const auto& e : entries) {
    if (total <= max_bytes) break;
    const std::string name = e.path.filename().string();
    if (pinned.count(name)) continue;
    fs::remove(e.path);
    total -= e.bytes;
    evicted.push_back(name);
  }
  return evicted;
}

}  // namespace seqasip
