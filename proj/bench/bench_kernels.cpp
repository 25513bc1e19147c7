// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <vector>

#include "seqasip/kernels.hpp"
#include "seqasip/stats.hpp"

using namespace seqasip;

namespace {

const IntervalMap& beta_map() {
  static const IntervalMap m = IntervalMap::beta(1.77);
  return m;
}

const UlamMatrix& matrix(std::size_t n) {
  static std::vector<std::pair<std::size_t, UlamMatrix>> memo;
  for (const auto& [k, m] : memo) {
    if (k == n) return m;
  }
  memo.emplace_back(n, build_ulam(beta_map(), n));
  return memo.back().second;
}

template <auto Rows>
void ulam_rows(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Rows(beta_map(), n));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <auto Kernel>
void apply(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const UlamMatrix& m = matrix(n);
  std::vector<double> f(n, 1.0), out(n);
  for (auto _ : st) {
    Kernel(m, f, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(m.nonzeros()));
}

template <bool Parallel>
void ensemble(benchmark::State& st) {
  const SequentialSystem sys(IntervalMap::beta(2.0), ParameterSchedule::additive(2.0, 1.0, 0.6), 1 << 12);
  const auto obs = ObservableSequence::constant(Observable::sawtooth());
  EnsembleSpec spec;
  spec.n_max = 1 << 10;
  spec.samples = static_cast<std::size_t>(st.range(0));
  spec.checkpoints = {spec.n_max};
  for (auto _ : st) {
    auto r = Parallel ? ensemble_birkhoff(sys, obs, {}, spec) : ensemble_birkhoff_serial(sys, obs, {}, spec);
    benchmark::DoNotOptimize(r.sums.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * spec.n_max);
}

}  // namespace

BENCHMARK(ulam_rows<kernels::serial::ulam_rows>)->Name("ulam_rows/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(ulam_rows<kernels::omp::ulam_rows>)->Name("ulam_rows/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(apply<kernels::serial::push>)->Name("push/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(apply<kernels::omp::push>)->Name("push/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(apply<kernels::serial::pull>)->Name("pull/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(apply<kernels::omp::pull>)->Name("pull/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(ensemble<false>)->Name("ensemble/serial")->Arg(1 << 10);
BENCHMARK(ensemble<true>)->Name("ensemble/omp")->Arg(1 << 10);

BENCHMARK_MAIN();
