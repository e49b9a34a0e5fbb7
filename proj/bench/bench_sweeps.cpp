#include <benchmark/benchmark.h>

#include <random>

#include "qp/sweep.hpp"

namespace {

// Three-species LV map with an attracting interior point; orbits stay bounded.
qp::QPMap sample_map() {
  using qp::RationalMatrix;
  return qp::QPMap::create({qp::Rational(1, 10), qp::Rational(1, 20), qp::Rational(3, 40)},
                           RationalMatrix{{qp::Rational(-1, 10), qp::Rational(1, 50), 0},
                                          {0, qp::Rational(-1, 20), qp::Rational(1, 100)},
                                          {qp::Rational(1, 100), 0, qp::Rational(-3, 40)}},
                           RationalMatrix::identity(3));
}

std::vector<qp::State> ensemble(std::size_t count) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<qp::State> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(qp::State{u(rng), u(rng), u(rng)});
  return out;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto map = sample_map();
  const auto init = ensemble(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qp::sweep::iterate_ensemble_serial(map, init, 200));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto map = sample_map();
  const auto init = ensemble(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qp::sweep::iterate_ensemble(map, init, 200));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
  state.counters["threads"] = qp::sweep::thread_count();
}

void BM_ConjugacySerial(benchmark::State& state) {
  const auto map = sample_map();
  const qp::QMTransform t(qp::RationalMatrix{{1, 1, 0}, {0, 1, 0}, {0, 0, 2}});
  const auto image = qp::apply_qm(map, t);
  const auto init = ensemble(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(qp::sweep::max_conjugacy_residual_serial(map, image, t, init));
}

void BM_ConjugacyParallel(benchmark::State& state) {
  const auto map = sample_map();
  const qp::QMTransform t(qp::RationalMatrix{{1, 1, 0}, {0, 1, 0}, {0, 0, 2}});
  const auto image = qp::apply_qm(map, t);
  const auto init = ensemble(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(qp::sweep::max_conjugacy_residual(map, image, t, init));
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConjugacySerial)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConjugacyParallel)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
