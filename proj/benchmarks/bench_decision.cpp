#include <benchmark/benchmark.h>

#include "cfee/alloc.hpp"
#include "cfee/harness/config_file.hpp"
#include "cfee/harness/experiments.hpp"
#include "cfee/perf.hpp"

namespace {

cfee::SystemConfig with_aps(int m) {
  cfee::SystemConfig cfg;
  cfg.num_aps = m;
  return cfg;
}

}  // namespace

static void BM_Realize(benchmark::State& state) {
  const auto cfg = with_aps(static_cast<int>(state.range(0)));
  const auto sc = cfee::netgen::generate_scenario(cfg, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::alloc::realize({0.5, 1.0, 0.5}, sc, cfg.antennas));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Realize)->DenseRange(20, 100, 20)->Complexity();

static void BM_ClosedFormSe(benchmark::State& state) {
  const auto cfg = with_aps(static_cast<int>(state.range(0)));
  const auto sc = cfee::netgen::generate_scenario(cfg, 2);
  const auto dec = cfee::alloc::realize({0.5, 1.0, 0.5}, sc, cfg.antennas);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::perf::closed_form_se(sc, dec, cfg));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ClosedFormSe)->DenseRange(20, 100, 20)->Complexity();

static void BM_GenerateScenario(benchmark::State& state) {
  const auto cfg = with_aps(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::netgen::generate_scenario(cfg, ++seed));
  }
}
BENCHMARK(BM_GenerateScenario)->Arg(40)->Arg(100);

static void BM_GridSearch10(benchmark::State& state) {
  const auto cfg = with_aps(40);
  const auto sc = cfee::netgen::generate_scenario(cfg, 3);
  const auto grid = cfee::harness::parse_grid("z=0.05:1:10,k=0:4:10,n=0:4:10");
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::harness::grid_search(sc, grid, cfg, 20.0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_GridSearch10)->Unit(benchmark::kMillisecond);

static void BM_McOracle(benchmark::State& state) {
  cfee::SystemConfig cfg;
  cfg.num_aps = 4;
  cfg.num_users = 3;
  cfg.antennas = 4;
  cfg.tau_p = 3;
  const auto sc = cfee::netgen::generate_scenario(cfg, 4);
  const auto dec = cfee::alloc::realize({1.0, 0.0, 1.0}, sc, cfg.antennas);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::perf::mc_se_oracle(sc, dec, cfg, state.range(0), 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McOracle)->Arg(2048)->Arg(16384)->Unit(benchmark::kMillisecond);
