#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "defer/link.hpp"
#include "defer/policy.hpp"

namespace defer {

// Sparse-binary context distribution: a binary vector with k ones is drawn
// with probability proportional to C(d, k) * lambda^k over k in
// {1, ..., max_ones} (the zero vector is excluded because the emitted context
// is the draw normalized to unit l2 norm).
struct SyntheticContextConfig {
  int dim = 20;
  int max_ones = 8;
  double lambda = 0.3;
};

class SyntheticContextDist {
 public:
  SyntheticContextDist(SyntheticContextConfig cfg, std::uint64_t seed);

  Eigen::VectorXd sample();

  int dim() const { return cfg_.dim; }
  int max_ones() const { return max_ones_; }
  // P(k ones), k = 1..max_ones; exposed so tests can check the marginal.
  const std::vector<double>& count_pmf() const { return pmf_; }

 private:
  SyntheticContextConfig cfg_;
  int max_ones_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<int> index_pool_;
  std::mt19937_64 rng_;
};

struct EnvironmentParams {
  Eigen::VectorXd theta_model;
  Eigen::VectorXd theta_human;
  Eigen::VectorXd w_cost;
};

enum class ParamRegime { Complementary, SkewedHuman, UniformRandom };

// Complementary: theta_human is binary with exactly floor(d/2) ones and
// theta_model = 1 - theta_human. SkewedHuman: theta_human ~ U[0,1]^d,
// theta_model ~ U[0,0.5]^d. UniformRandom: both ~ U[0,1]^d. The cost vector
// is ~ U[0,1]^d in every regime.
EnvironmentParams gen_params(ParamRegime regime, int dim, std::uint64_t seed);

// Exact mean of clamp(N(mean, sigma^2), 0, 1); equals clamp(mean, 0, 1) when
// sigma = 0.
double clamped_gaussian_mean(double mean, double sigma);

struct RealizedOutcome {
  double reward_model = 0.0;
  double reward_human = 0.0;
  double cost = 0.0;
};

// Generalized-linear outcome generator: each realized value is
// clamp(mu(x' param) + N(0, noise_sigma^2), 0, 1). All three outcomes are
// realized every round; the policy's observation mode decides what is
// revealed.
class LinearEnvironment {
 public:
  LinearEnvironment(EnvironmentParams params, LinkSet links, double noise_sigma,
                    std::uint64_t seed);

  RealizedOutcome realize(const Eigen::VectorXd& x);

  // True per-round means of the realized (clamped) outcomes; what an oracle
  // that knows the parameters expects to collect.
  double mean_reward_model(const Eigen::VectorXd& x) const;
  double mean_reward_human(const Eigen::VectorXd& x) const;
  double mean_cost(const Eigen::VectorXd& x) const;

  const EnvironmentParams& params() const { return params_; }
  const LinkSet& links() const { return links_; }

 private:
  double draw(double mean);

  EnvironmentParams params_;
  LinkSet links_;
  double noise_sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

// RoundSource over a context distribution and an outcome generator.
class SyntheticRoundSource : public RoundSource {
 public:
  SyntheticRoundSource(SyntheticContextDist dist, LinearEnvironment env)
      : dist_(std::move(dist)), env_(std::move(env)) {}

  std::optional<RoundSample> next() override {
    RoundSample s;
    s.context = dist_.sample();
    const RealizedOutcome o = env_.realize(s.context);
    s.reward_model = o.reward_model;
    s.reward_human = o.reward_human;
    s.cost = o.cost;
    return s;
  }

 private:
  SyntheticContextDist dist_;
  LinearEnvironment env_;
};

}  // namespace defer
