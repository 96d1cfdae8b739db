#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "defer/environment.hpp"
#include "defer/estimator.hpp"
#include "defer/neural.hpp"
#include "defer/oracles.hpp"
#include "defer/policy.hpp"
#include "defer/rng.hpp"

namespace {

using namespace defer;

std::vector<Eigen::VectorXd> sample_contexts(int dim, int count, std::uint64_t seed) {
  SyntheticContextDist dist(SyntheticContextConfig{dim, std::min(8, dim), 0.3}, seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(dist.sample());
  return out;
}

void BM_ContextSample(benchmark::State& state) {
  SyntheticContextDist dist(SyntheticContextConfig{static_cast<int>(state.range(0)), 8, 0.3}, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dist.sample());
  }
}
BENCHMARK(BM_ContextSample)->Arg(20)->Arg(50);

void BM_EstimatorUpdate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const std::vector<Eigen::VectorXd> contexts = sample_contexts(d, 1024, 2);
  ArmEstimator est(d, 1.0, LinkFunction::identity());
  std::size_t i = 0;
  for (auto _ : state) {
    est.update(contexts[i++ & 1023], 0.5);
    benchmark::DoNotOptimize(est.mle());
  }
}
BENCHMARK(BM_EstimatorUpdate)->Arg(20)->Arg(51);

void BM_OptimisticMean(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const std::vector<Eigen::VectorXd> contexts = sample_contexts(d, 1024, 3);
  ArmEstimator est(d, 1.0, LinkFunction::identity());
  for (int i = 0; i < 4 * d; ++i) est.update(contexts[static_cast<std::size_t>(i)], 0.5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        est.optimistic_mean(contexts[i++ & 1023], 1.7, OptimisticDirection::RewardUp));
  }
}
BENCHMARK(BM_OptimisticMean)->Arg(20)->Arg(51);

void BM_PolicyRound(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  PolicyConfig cfg;
  cfg.horizon = 1 << 22;
  cfg.budget = cfg.horizon * 0.2;
  cfg.dim = d;
  cfg.confidence = ConfidenceConfig{0.1, 1.0, 0.1};
  cfg.seed = 4;
  DeferralPolicy policy(cfg);

  SyntheticContextDist dist(SyntheticContextConfig{d, std::min(8, d), 0.3}, 5);
  EnvironmentParams params = gen_params(ParamRegime::UniformRandom, d, 6);
  LinearEnvironment env(params, LinkSet{}, 0.1, 7);

  for (auto _ : state) {
    const Eigen::VectorXd x = dist.sample();
    const RealizedOutcome o = env.realize(x);
    const RoundSample s{x, o.reward_model, o.reward_human, o.cost};
    const bool main = policy.phase() == Phase::Main;
    const Decision dec = policy.act(x);
    policy.observe(x, dec, make_observation(cfg.feedback, dec.arm, s));
    if (main) policy.update_dual(dec.arm == Arm::Human ? s.cost : 0.0);
  }
}
BENCHMARK(BM_PolicyRound)->Arg(10)->Arg(20);

void BM_OptStaticEmpirical(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng = make_rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<OptRow> rows(static_cast<std::size_t>(n));
  for (OptRow& r : rows) r = OptRow{unif(rng) - 0.3, unif(rng), unif(rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(opt_static_empirical(rows, 0.16 * n));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_OptStaticEmpirical)->Range(1 << 12, 1 << 16)->Complexity();

void BM_MlpTrainStep(benchmark::State& state) {
  const int d = 35;
  Mlp net(d, 50, 9);
  AdamOptimizer adam(d, 50, 0.0005);
  std::mt19937_64 rng = make_rng(10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Sample> batch;
  const std::vector<Eigen::VectorXd> contexts =
      sample_contexts(d, static_cast<int>(state.range(0)), 11);
  for (const Eigen::VectorXd& x : contexts) batch.emplace_back(x, unif(rng));
  for (auto _ : state) {
    train_step(net, adam, batch);
    benchmark::DoNotOptimize(net.b2);
  }
}
BENCHMARK(BM_MlpTrainStep)->Arg(500);

void BM_KnapsackExact(benchmark::State& state) {
  const KnapsackInstance inst = gen_knapsack_instance(12, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(knapsack_exact(inst));
  }
}
BENCHMARK(BM_KnapsackExact)->Arg(18)->Arg(22);

void BM_RatioMax4(benchmark::State& state) {
  const KnapsackInstance inst = gen_knapsack_instance(13, 18);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ratiomax4(inst));
  }
}
BENCHMARK(BM_RatioMax4);

}  // namespace

BENCHMARK_MAIN();
