#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "defer/estimator.hpp"
#include "defer/policy.hpp"

namespace defer {

// Two-layer network: rectifier between input and hidden, sigmoid on the
// scalar output. The hidden activations are the embedding handed to the
// linear machinery. Weights are public; tests and the freezing paths
// manipulate them directly.
class Mlp {
 public:
  Mlp(int input_dim, int hidden_dim, std::uint64_t seed);

  int input_dim() const { return static_cast<int>(w1.rows()); }
  int hidden_dim() const { return static_cast<int>(w1.cols()); }

  // rectifier(W1^T x + b1). Throws DomainError on dimension mismatch.
  Eigen::VectorXd embed(const Eigen::VectorXd& x) const;
  // sigmoid(W2^T embed(x) + b2), always in (0, 1).
  double predict(const Eigen::VectorXd& x) const;
  std::pair<Eigen::VectorXd, double> forward(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd w1;  // input_dim x hidden_dim
  Eigen::VectorXd b1;  // hidden_dim
  Eigen::VectorXd w2;  // hidden_dim
  double b2 = 0.0;
};

struct MlpGradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

// Mean squared error between sigmoid outputs and targets, averaged over the
// batch, and its gradient.
double mse_loss(const Mlp& net, std::span<const Sample> batch);
MlpGradient mse_gradient(const Mlp& net, std::span<const Sample> batch);

class AdamOptimizer {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  AdamOptimizer(int input_dim, int hidden_dim, double learning_rate);

  // One Adam update. Throws NumericError if the gradient is not finite.
  void apply(Mlp& net, const MlpGradient& grad);

  double learning_rate() const { return learning_rate_; }
  std::int64_t steps() const { return steps_; }

 private:
  double learning_rate_;
  std::int64_t steps_ = 0;
  MlpGradient m_;
  MlpGradient v_;
};

// One Adam update on the batch MSE.
void train_step(Mlp& net, AdamOptimizer& adam, std::span<const Sample> batch);

// Retraining cadence: every update_every rounds, optionally switching to a
// longer period after switch_round.
struct TrainSchedule {
  std::int64_t update_every = 10;
  std::int64_t late_update_every = 0;  // 0 means no switch
  std::int64_t switch_round = 0;
  int batch_size = 500;

  std::int64_t active_period(std::int64_t t) const {
    return (late_update_every > 0 && t > switch_round) ? late_update_every : update_every;
  }
  bool due(std::int64_t t) const { return t >= 1 && t % active_period(t) == 0; }
  void validate() const;
};

// Stored raw contexts and responses for one estimator, with the current
// embeddings of every stored context.
class EmbeddingBank {
 public:
  void add(Eigen::VectorXd raw, double response, Eigen::VectorXd embedding);
  std::size_t size() const { return responses_.size(); }
  const Eigen::VectorXd& raw(std::size_t i) const { return raw_[i]; }
  double response(std::size_t i) const { return responses_[i]; }
  const Eigen::VectorXd& embedding(std::size_t i) const { return embeddings_[i]; }

  // embeddings <- net.embed(raw) for every stored context.
  void recompute(const Mlp& net);

  std::vector<Sample> training_data() const;                    // (raw, response)
  std::vector<Sample> embedded_samples(bool append_bias) const; // (embedding [+1], response)

 private:
  std::vector<Eigen::VectorXd> raw_;
  std::vector<double> responses_;
  std::vector<Eigen::VectorXd> embeddings_;
};

// When t is a multiple of the active period and the bank is non-empty: one
// pass of shuffled mini-batch updates over the stored data, then (when
// recompute_embeddings) every stored embedding is recomputed with the new
// network and the estimator is rebuilt from scratch over them.
void retrain_and_rebuild(EmbeddingBank& bank, Mlp& net, AdamOptimizer& adam, ArmEstimator& est,
                         const TrainSchedule& schedule, std::int64_t t, std::mt19937_64& rng,
                         bool recompute_embeddings);

struct NeuralPolicyConfig {
  PolicyConfig policy;  // dim is the raw context dimension
  int hidden_dim = 50;
  TrainSchedule schedule;
  double learning_rate = 0.0005;
  // Off switches to the memory fallback: old embeddings stay as first
  // computed and the linear state is never rebuilt.
  bool recompute_embeddings = true;
  std::uint64_t seed = 0;  // network init and batch shuffling

  void validate() const;
};

// The deferral policy run on learned embeddings: three networks embed each
// raw context (one per estimator, a constant 1 appended so the linear layer
// carries an intercept), the core policy consumes the embeddings, and the
// networks are retrained on the schedule with full rebuild of the linear
// state.
class NeuralDeferralPolicy {
 public:
  explicit NeuralDeferralPolicy(NeuralPolicyConfig cfg);

  Phase phase() const { return core_.phase(); }
  const PolicyState& state() const { return core_.state(); }
  const PolicyConfig& core_config() const { return core_.config(); }
  int embedded_dim() const { return cfg_.hidden_dim + 1; }

  Decision act(const Eigen::VectorXd& raw_x);
  void observe(const Eigen::VectorXd& raw_x, const Decision& decision, const Observation& obs);
  void update_dual(double incurred_cost) { core_.update_dual(incurred_cost); }

  Mlp& net_model() { return net_model_; }
  Mlp& net_human() { return net_human_; }
  Mlp& net_cost() { return net_cost_; }

 private:
  Eigen::VectorXd embed_with_bias(const Mlp& net, const Eigen::VectorXd& x) const;

  NeuralPolicyConfig cfg_;
  DeferralPolicy core_;
  Mlp net_model_;
  Mlp net_human_;
  Mlp net_cost_;
  AdamOptimizer adam_model_;
  AdamOptimizer adam_human_;
  AdamOptimizer adam_cost_;
  EmbeddingBank bank_model_;
  EmbeddingBank bank_human_;
  EmbeddingBank bank_cost_;
  std::mt19937_64 batch_rng_;
};

std::vector<EpisodeRow> run_neural_episode(const NeuralPolicyConfig& cfg, RoundSource& env);

}  // namespace defer
