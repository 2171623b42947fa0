#include <benchmark/benchmark.h>

#include "cfee/env.hpp"
#include "cfee/ppo/policy.hpp"

static void BM_PolicyDecision(benchmark::State& state) {
  cfee::SystemConfig cfg;
  cfg.num_aps = static_cast<int>(state.range(0));
  const auto norm = cfee::env::FeatureNormalizer::fit(
      cfg, cfee::env::FeatureMode::kDbStandardized, 20, 1);
  cfee::Rng rng = cfee::make_rng(1);
  const auto pol = cfee::ppo::GaussianPolicy::create(
      cfee::ppo::ActionSpace::proposed({}), cfg.num_aps * cfg.num_users,
      {256, 256}, -0.69, rng);
  const auto sc = cfee::netgen::generate_scenario(cfg, 7);
  for (auto _ : state) {
    const auto action = pol.deterministic(norm.transform(sc.beta));
    benchmark::DoNotOptimize(cfee::alloc::realize(action, sc, cfg.antennas));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PolicyDecision)->DenseRange(20, 100, 20)->Complexity();

static void BM_ActorBatchForward(benchmark::State& state) {
  cfee::Rng rng = cfee::make_rng(2);
  const auto net = cfee::ppo::init_params({800, {256, 256}, 3}, rng, 0.01);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(800, state.range(0));
  cfee::ppo::ForwardCache cache;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::ppo::forward(net, x, &cache));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActorBatchForward)->Arg(1)->Arg(64);

static void BM_ActorBackward(benchmark::State& state) {
  cfee::Rng rng = cfee::make_rng(3);
  const auto net = cfee::ppo::init_params({800, {256, 256}, 3}, rng, 0.01);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(800, 64);
  cfee::ppo::ForwardCache cache;
  cfee::ppo::forward(net, x, &cache);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(3, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfee::ppo::backward(net, cache, g));
  }
}
BENCHMARK(BM_ActorBackward);
BENCHMARK_MAIN();
