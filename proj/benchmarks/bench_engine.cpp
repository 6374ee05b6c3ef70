#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "psim/engine.hpp"
#include "psim/experiment.hpp"
#include "psim/prop_verifier.hpp"

namespace {

void BM_DailyCell(benchmark::State& state) {
  const auto strategy = static_cast<psim::StrategyId>(state.range(0));
  const psim::CellSpec cell{strategy, psim::DailyShape::Flat, static_cast<int>(state.range(1)), 1};
  const psim::SimConfig cfg;
  const psim::DailyCurveParams curve;
  std::size_t requests = 0;
  for (auto _ : state) {
    const auto r = psim::run_cell(cell, cfg, curve, false);
    requests = r.summary.requests;
    benchmark::DoNotOptimize(requests);
  }
  state.counters["requests"] = static_cast<double>(requests);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * requests));
}
BENCHMARK(BM_DailyCell)
    ->ArgsProduct({{0, 1, 2}, {4, 10, 20}})
    ->ArgNames({"strategy", "servers"})
    ->Unit(benchmark::kMillisecond);

std::vector<psim::QueuedTask<double>> random_queue(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<psim::QueuedTask<double>> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i].task = {i, static_cast<psim::UserId>(i), u(rng), 10.0};
    q[i].expected_rt = 10.0 + u(rng);
  }
  return q;
}

void BM_Choose(benchmark::State& state) {
  const auto strategy = static_cast<psim::StrategyId>(state.range(0));
  const auto q = random_queue(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(psim::choose<double>(strategy, q, 150.0));
  }
}
BENCHMARK(BM_Choose)->ArgsProduct({{0, 1, 2}, {8, 64, 512}})->ArgNames({"strategy", "queue"});

void BM_FamilyExact(benchmark::State& state) {
  const auto cfg = psim::make_family_f_config(2, static_cast<int>(state.range(0)), psim::Rational(10),
                                              psim::Rational(6), 5, 50);
  const auto sim = psim::family_f_sim_config(cfg);
  const auto workload = psim::generate_family_f(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(psim::run_simulation<psim::Rational>(sim, workload, psim::StrategyId::Eas));
  }
}
BENCHMARK(BM_FamilyExact)->Arg(2)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_BruteForceBatch(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto batch = psim::random_batch(rng, static_cast<std::size_t>(state.range(0)), 2);
  const auto impact = psim::decreasing_abs_impact(psim::Rational(1, 200));
  for (auto _ : state) benchmark::DoNotOptimize(psim::brute_force_batch(batch, impact));
}
BENCHMARK(BM_BruteForceBatch)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
