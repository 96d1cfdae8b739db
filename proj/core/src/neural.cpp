#include "defer/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "defer/errors.hpp"
#include "defer/rng.hpp"

namespace defer {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool all_finite(const MlpGradient& g) {
  return g.w1.allFinite() && g.b1.allFinite() && g.w2.allFinite() && std::isfinite(g.b2);
}

MlpGradient zero_like(int input_dim, int hidden_dim) {
  MlpGradient g;
  g.w1 = Eigen::MatrixXd::Zero(input_dim, hidden_dim);
  g.b1 = Eigen::VectorXd::Zero(hidden_dim);
  g.w2 = Eigen::VectorXd::Zero(hidden_dim);
  g.b2 = 0.0;
  return g;
}

}  // namespace

Mlp::Mlp(int input_dim, int hidden_dim, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1) throw DomainError("Mlp dimensions must be >= 1");
  std::mt19937_64 rng = make_rng(seed);
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double hid_bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> in_unif(-in_bound, in_bound);
  std::uniform_real_distribution<double> hid_unif(-hid_bound, hid_bound);

  w1 = Eigen::MatrixXd(input_dim, hidden_dim);
  for (int i = 0; i < input_dim; ++i) {
    for (int j = 0; j < hidden_dim; ++j) w1(i, j) = in_unif(rng);
  }
  b1 = Eigen::VectorXd(hidden_dim);
  for (int j = 0; j < hidden_dim; ++j) b1[j] = in_unif(rng);
  w2 = Eigen::VectorXd(hidden_dim);
  for (int j = 0; j < hidden_dim; ++j) w2[j] = hid_unif(rng);
  b2 = hid_unif(rng);
}

Eigen::VectorXd Mlp::embed(const Eigen::VectorXd& x) const {
  if (x.size() != w1.rows()) {
    throw DomainError("Mlp input dimension mismatch: got " + std::to_string(x.size()) +
                      ", expected " + std::to_string(w1.rows()));
  }
  return (w1.transpose() * x + b1).cwiseMax(0.0);
}

double Mlp::predict(const Eigen::VectorXd& x) const { return sigmoid(w2.dot(embed(x)) + b2); }

std::pair<Eigen::VectorXd, double> Mlp::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd e = embed(x);
  const double p = sigmoid(w2.dot(e) + b2);
  return {std::move(e), p};
}

double mse_loss(const Mlp& net, std::span<const Sample> batch) {
  if (batch.empty()) throw DomainError("mse_loss requires a non-empty batch");
  double total = 0.0;
  for (const Sample& s : batch) {
    const double diff = net.predict(s.first) - s.second;
    total += diff * diff;
  }
  return total / static_cast<double>(batch.size());
}

MlpGradient mse_gradient(const Mlp& net, std::span<const Sample> batch) {
  if (batch.empty()) throw DomainError("mse_gradient requires a non-empty batch");
  MlpGradient grad = zero_like(net.input_dim(), net.hidden_dim());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Sample& s : batch) {
    const Eigen::VectorXd pre = net.w1.transpose() * s.first + net.b1;
    const Eigen::VectorXd e = pre.cwiseMax(0.0);
    const double p = sigmoid(net.w2.dot(e) + net.b2);
    // d/dz of (p - y)^2 with p = sigmoid(z): 2 (p - y) p (1 - p)
    const double gz = 2.0 * scale * (p - s.second) * p * (1.0 - p);
    grad.w2.noalias() += gz * e;
    grad.b2 += gz;
    Eigen::VectorXd ge = gz * net.w2;
    for (int j = 0; j < ge.size(); ++j) {
      if (pre[j] <= 0.0) ge[j] = 0.0;  // rectifier gate
    }
    grad.w1.noalias() += s.first * ge.transpose();
    grad.b1.noalias() += ge;
  }
  return grad;
}

AdamOptimizer::AdamOptimizer(int input_dim, int hidden_dim, double learning_rate)
    : learning_rate_(learning_rate),
      m_(zero_like(input_dim, hidden_dim)),
      v_(zero_like(input_dim, hidden_dim)) {
  if (!(learning_rate >= 0.0)) throw DomainError("learning rate must be >= 0");
}

void AdamOptimizer::apply(Mlp& net, const MlpGradient& grad) {
  if (!all_finite(grad)) {
    throw NumericError("non-finite gradient in Adam step " + std::to_string(steps_ + 1));
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    param -= (learning_rate_ / bc1) *
             (m.array() / ((v.array() / bc2).sqrt() + kEpsilon)).matrix();
  };
  update(net.w1, m_.w1, v_.w1, grad.w1);
  update(net.b1, m_.b1, v_.b1, grad.b1);
  update(net.w2, m_.w2, v_.w2, grad.w2);
  m_.b2 = kBeta1 * m_.b2 + (1.0 - kBeta1) * grad.b2;
  v_.b2 = kBeta2 * v_.b2 + (1.0 - kBeta2) * grad.b2 * grad.b2;
  net.b2 -= (learning_rate_ / bc1) * (m_.b2 / (std::sqrt(v_.b2 / bc2) + kEpsilon));
}

void train_step(Mlp& net, AdamOptimizer& adam, std::span<const Sample> batch) {
  adam.apply(net, mse_gradient(net, batch));
}

void TrainSchedule::validate() const {
  if (update_every < 1) throw ConfigError("schedule update_every must be >= 1");
  if (late_update_every < 0) throw ConfigError("schedule late_update_every must be >= 0");
  if (switch_round < 0) throw ConfigError("schedule switch_round must be >= 0");
  if (batch_size < 1) throw ConfigError("schedule batch_size must be >= 1");
}

void EmbeddingBank::add(Eigen::VectorXd raw, double response, Eigen::VectorXd embedding) {
  raw_.push_back(std::move(raw));
  responses_.push_back(response);
  embeddings_.push_back(std::move(embedding));
}

void EmbeddingBank::recompute(const Mlp& net) {
  for (std::size_t i = 0; i < raw_.size(); ++i) embeddings_[i] = net.embed(raw_[i]);
}

std::vector<Sample> EmbeddingBank::training_data() const {
  std::vector<Sample> data;
  data.reserve(raw_.size());
  for (std::size_t i = 0; i < raw_.size(); ++i) data.emplace_back(raw_[i], responses_[i]);
  return data;
}

std::vector<Sample> EmbeddingBank::embedded_samples(bool append_bias) const {
  std::vector<Sample> data;
  data.reserve(embeddings_.size());
  for (std::size_t i = 0; i < embeddings_.size(); ++i) {
    if (append_bias) {
      Eigen::VectorXd e(embeddings_[i].size() + 1);
      e.head(embeddings_[i].size()) = embeddings_[i];
      e[embeddings_[i].size()] = 1.0;
      data.emplace_back(std::move(e), responses_[i]);
    } else {
      data.emplace_back(embeddings_[i], responses_[i]);
    }
  }
  return data;
}

void retrain_and_rebuild(EmbeddingBank& bank, Mlp& net, AdamOptimizer& adam, ArmEstimator& est,
                         const TrainSchedule& schedule, std::int64_t t, std::mt19937_64& rng,
                         bool recompute_embeddings) {
  if (!schedule.due(t)) return;
  if (bank.size() == 0) return;

  // One epoch over the stored data in shuffled mini-batches.
  std::vector<std::size_t> order(bank.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Sample> batch;
  batch.reserve(static_cast<std::size_t>(schedule.batch_size));
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(schedule.batch_size)) {
    batch.clear();
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(schedule.batch_size));
    for (std::size_t i = start; i < end; ++i) {
      batch.emplace_back(bank.raw(order[i]), bank.response(order[i]));
    }
    train_step(net, adam, batch);
  }

  if (recompute_embeddings) {
    bank.recompute(net);
    est.rebuild(bank.embedded_samples(true));
  }
}

void NeuralPolicyConfig::validate() const {
  policy.validate();
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  schedule.validate();
}

namespace {

PolicyConfig embedded_policy_config(const NeuralPolicyConfig& cfg) {
  PolicyConfig core = cfg.policy;
  core.dim = cfg.hidden_dim + 1;  // constant 1 appended for the intercept
  return core;
}

}  // namespace

NeuralDeferralPolicy::NeuralDeferralPolicy(NeuralPolicyConfig cfg)
    : cfg_(std::move(cfg)),
      core_((cfg_.validate(), embedded_policy_config(cfg_))),
      net_model_(cfg_.policy.dim, cfg_.hidden_dim, derive_seed(cfg_.seed, 1)),
      net_human_(cfg_.policy.dim, cfg_.hidden_dim, derive_seed(cfg_.seed, 2)),
      net_cost_(cfg_.policy.dim, cfg_.hidden_dim, derive_seed(cfg_.seed, 3)),
      adam_model_(cfg_.policy.dim, cfg_.hidden_dim, cfg_.learning_rate),
      adam_human_(cfg_.policy.dim, cfg_.hidden_dim, cfg_.learning_rate),
      adam_cost_(cfg_.policy.dim, cfg_.hidden_dim, cfg_.learning_rate),
      batch_rng_(make_rng(derive_seed(cfg_.seed, 4))) {}

Eigen::VectorXd NeuralDeferralPolicy::embed_with_bias(const Mlp& net,
                                                      const Eigen::VectorXd& x) const {
  Eigen::VectorXd e(cfg_.hidden_dim + 1);
  e.head(cfg_.hidden_dim) = net.embed(x);
  e[cfg_.hidden_dim] = 1.0;
  return e;
}

Decision NeuralDeferralPolicy::act(const Eigen::VectorXd& raw_x) {
  return core_.act(embed_with_bias(net_model_, raw_x), embed_with_bias(net_human_, raw_x),
                   embed_with_bias(net_cost_, raw_x));
}

void NeuralDeferralPolicy::observe(const Eigen::VectorXd& raw_x, const Decision& decision,
                                   const Observation& obs) {
  const Eigen::VectorXd e_model = embed_with_bias(net_model_, raw_x);
  const Eigen::VectorXd e_human = embed_with_bias(net_human_, raw_x);
  const Eigen::VectorXd e_cost = embed_with_bias(net_cost_, raw_x);

  if (obs.reward_model) {
    bank_model_.add(raw_x, *obs.reward_model, e_model.head(cfg_.hidden_dim));
  }
  if (obs.reward_human) {
    bank_human_.add(raw_x, *obs.reward_human, e_human.head(cfg_.hidden_dim));
  }
  if (obs.cost) {
    bank_cost_.add(raw_x, *obs.cost, e_cost.head(cfg_.hidden_dim));
  }

  core_.observe(e_model, e_human, e_cost, decision, obs);

  const std::int64_t t = core_.state().round;
  if (cfg_.schedule.due(t)) {
    PolicyState& st = core_.mutable_state();
    retrain_and_rebuild(bank_model_, net_model_, adam_model_, st.est_model, cfg_.schedule, t,
                        batch_rng_, cfg_.recompute_embeddings);
    retrain_and_rebuild(bank_human_, net_human_, adam_human_, st.est_human, cfg_.schedule, t,
                        batch_rng_, cfg_.recompute_embeddings);
    retrain_and_rebuild(bank_cost_, net_cost_, adam_cost_, st.est_cost, cfg_.schedule, t,
                        batch_rng_, cfg_.recompute_embeddings);
  }
}

std::vector<EpisodeRow> run_neural_episode(const NeuralPolicyConfig& cfg, RoundSource& env) {
  NeuralDeferralPolicy policy(cfg);
  return detail::drive_episode(policy, cfg.policy, env);
}

}  // namespace defer
