#include "defer/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "defer/errors.hpp"
#include "defer/rng.hpp"

namespace defer {

namespace {

double standard_normal_pdf(double z) {
  static const double kInvSqrt2Pi = 0.3989422804014327;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

SyntheticContextDist::SyntheticContextDist(SyntheticContextConfig cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(make_rng(seed)) {
  if (cfg_.dim < 1) throw DomainError("context dimension must be >= 1");
  if (cfg_.max_ones < 1) throw DomainError("max_ones must be >= 1");
  if (!(cfg_.lambda > 0.0 && cfg_.lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
  max_ones_ = std::min(cfg_.max_ones, cfg_.dim);

  // Unnormalized weight of count k is C(d, k) lambda^k; built up via the
  // recurrence C(d,k) = C(d,k-1) (d-k+1)/k.
  pmf_.resize(static_cast<std::size_t>(max_ones_));
  double weight = static_cast<double>(cfg_.dim) * cfg_.lambda;  // k = 1
  pmf_[0] = weight;
  for (int k = 2; k <= max_ones_; ++k) {
    weight *= cfg_.lambda * static_cast<double>(cfg_.dim - k + 1) / static_cast<double>(k);
    pmf_[static_cast<std::size_t>(k - 1)] = weight;
  }
  const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf_.size(); ++i) {
    pmf_[i] /= total;
    acc += pmf_[i];
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;

  index_pool_.resize(static_cast<std::size_t>(cfg_.dim));
  std::iota(index_pool_.begin(), index_pool_.end(), 0);
}

Eigen::VectorXd SyntheticContextDist::sample() {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng_);
  int k = 1;
  while (k < max_ones_ && u > cdf_[static_cast<std::size_t>(k - 1)]) ++k;

  // Uniform k-subset via a partial Fisher-Yates pass over the index pool.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, cfg_.dim - 1);
    std::swap(index_pool_[static_cast<std::size_t>(i)],
              index_pool_[static_cast<std::size_t>(pick(rng_))]);
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(cfg_.dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (int i = 0; i < k; ++i) x[index_pool_[static_cast<std::size_t>(i)]] = scale;
  return x;
}

EnvironmentParams gen_params(ParamRegime regime, int dim, std::uint64_t seed) {
  if (dim < 1) throw DomainError("gen_params requires dim >= 1");
  std::mt19937_64 rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  EnvironmentParams params;
  params.theta_model = Eigen::VectorXd::Zero(dim);
  params.theta_human = Eigen::VectorXd::Zero(dim);
  params.w_cost = Eigen::VectorXd::Zero(dim);

  switch (regime) {
    case ParamRegime::Complementary: {
      std::vector<int> idx(static_cast<std::size_t>(dim));
      std::iota(idx.begin(), idx.end(), 0);
      const int ones = dim / 2;
      for (int i = 0; i < ones; ++i) {
        std::uniform_int_distribution<int> pick(i, dim - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
      }
      for (int i = 0; i < ones; ++i) params.theta_human[idx[static_cast<std::size_t>(i)]] = 1.0;
      params.theta_model = Eigen::VectorXd::Ones(dim) - params.theta_human;
      break;
    }
    case ParamRegime::SkewedHuman: {
      for (int i = 0; i < dim; ++i) params.theta_human[i] = unit(rng);
      for (int i = 0; i < dim; ++i) params.theta_model[i] = 0.5 * unit(rng);
      break;
    }
    case ParamRegime::UniformRandom: {
      for (int i = 0; i < dim; ++i) params.theta_human[i] = unit(rng);
      for (int i = 0; i < dim; ++i) params.theta_model[i] = unit(rng);
      break;
    }
  }
  for (int i = 0; i < dim; ++i) params.w_cost[i] = unit(rng);
  return params;
}

double clamped_gaussian_mean(double mean, double sigma) {
  if (!std::isfinite(mean) || !std::isfinite(sigma) || sigma < 0.0) {
    throw DomainError("clamped_gaussian_mean requires finite mean and sigma >= 0");
  }
  if (sigma == 0.0) return std::clamp(mean, 0.0, 1.0);
  const double a = (0.0 - mean) / sigma;
  const double b = (1.0 - mean) / sigma;
  return (1.0 - standard_normal_cdf(b)) +
         mean * (standard_normal_cdf(b) - standard_normal_cdf(a)) +
         sigma * (standard_normal_pdf(a) - standard_normal_pdf(b));
}

LinearEnvironment::LinearEnvironment(EnvironmentParams params, LinkSet links, double noise_sigma,
                                     std::uint64_t seed)
    : params_(std::move(params)),
      links_(links),
      noise_sigma_(noise_sigma),
      rng_(make_rng(seed)),
      normal_(0.0, 1.0) {
  if (!(noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");
  const auto d = params_.theta_model.size();
  if (params_.theta_human.size() != d || params_.w_cost.size() != d || d < 1) {
    throw DomainError("environment parameter vectors must share a positive dimension");
  }
}

double LinearEnvironment::draw(double mean) {
  const double noisy = noise_sigma_ > 0.0 ? mean + noise_sigma_ * normal_(rng_) : mean;
  return std::clamp(noisy, 0.0, 1.0);
}

RealizedOutcome LinearEnvironment::realize(const Eigen::VectorXd& x) {
  RealizedOutcome out;
  out.reward_model = draw(links_.reward_model.mu(x.dot(params_.theta_model)));
  out.reward_human = draw(links_.reward_human.mu(x.dot(params_.theta_human)));
  out.cost = draw(links_.cost.mu(x.dot(params_.w_cost)));
  return out;
}

double LinearEnvironment::mean_reward_model(const Eigen::VectorXd& x) const {
  return clamped_gaussian_mean(links_.reward_model.mu(x.dot(params_.theta_model)), noise_sigma_);
}

double LinearEnvironment::mean_reward_human(const Eigen::VectorXd& x) const {
  return clamped_gaussian_mean(links_.reward_human.mu(x.dot(params_.theta_human)), noise_sigma_);
}

double LinearEnvironment::mean_cost(const Eigen::VectorXd& x) const {
  return clamped_gaussian_mean(links_.cost.mu(x.dot(params_.w_cost)), noise_sigma_);
}

}  // namespace defer
