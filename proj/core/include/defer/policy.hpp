#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "defer/errors.hpp"
#include "defer/estimator.hpp"
#include "defer/link.hpp"

namespace defer {

enum class Arm { Model, Human };
enum class FeedbackMode { FullInformation, PureBandit };
enum class Phase { Initializing, Main };

struct PolicyConfig {
  std::int64_t horizon = 0;  // T
  double budget = 0.0;       // B; costs never exceed 1 per round, so B <= T
  int dim = 0;
  FeedbackMode feedback = FeedbackMode::FullInformation;
  LinkSet links;
  ConfidenceConfig confidence;
  double ridge = 1.0;
  std::int64_t init_rounds_cap = 0;  // 0 means the default of 4 * dim
  // The Human arm is only playable while remaining budget >= budget_guard;
  // it must dominate the maximum per-round cost for the spend ledger to hold.
  double budget_guard = 1.0;
  // When set, beta uses each estimator's observation count instead of the
  // global round index.
  bool per_arm_time_index = false;
  std::uint64_t seed = 0;

  double epsilon() const;  // sqrt(2 / T), the dual step size
  std::int64_t effective_init_cap() const;
  void validate() const;  // throws ConfigError
};

struct Decision {
  Arm arm = Arm::Model;
  // Priced objectives mu(x' theta~) - (T/B) gamma cost~; NaN on initialization
  // rounds and on budget-forced rounds, where no scoring happens.
  double score_model = 0.0;
  double score_human = 0.0;
  bool forced = false;  // true when budget exhaustion forced the Model arm
};

// Realized feedback for one round, already filtered to what the configured
// observation mode reveals.
struct Observation {
  std::optional<double> reward_model;
  std::optional<double> reward_human;
  std::optional<double> cost;
};

struct PolicyState {
  ArmEstimator est_model;
  ArmEstimator est_human;
  ArmEstimator est_cost;
  double gamma = 0.5;
  double alpha = 0.5;
  double spent = 0.0;
  std::int64_t round = 0;  // completed rounds
  Phase phase = Phase::Initializing;
};

// One realized round supplied by an environment: the context plus all three
// outcomes (the observation mode decides what the policy gets to see).
struct RoundSample {
  Eigen::VectorXd context;
  double reward_model = 0.0;
  double reward_human = 0.0;
  double cost = 0.0;
};

class RoundSource {
 public:
  virtual ~RoundSource() = default;
  virtual std::optional<RoundSample> next() = 0;
};

class VectorRoundSource : public RoundSource {
 public:
  explicit VectorRoundSource(std::vector<RoundSample> rounds) : rounds_(std::move(rounds)) {}
  std::optional<RoundSample> next() override {
    if (index_ >= rounds_.size()) return std::nullopt;
    return rounds_[index_++];
  }

 private:
  std::vector<RoundSample> rounds_;
  std::size_t index_ = 0;
};

// Builds the Observation the configured mode reveals for a chosen arm.
Observation make_observation(FeedbackMode mode, Arm arm, const RoundSample& sample);

// The budgeted two-armed deferral policy: a random initialization phase until
// every estimator's un-ridged design has minimum eigenvalue >= 1 (capped),
// then optimistic selection under the dual-priced objective, with the dual
// weight advanced multiplicatively every main-phase round.
class DeferralPolicy {
 public:
  explicit DeferralPolicy(PolicyConfig cfg);

  const PolicyConfig& config() const { return cfg_; }
  const PolicyState& state() const { return st_; }
  PolicyState& mutable_state() { return st_; }
  Phase phase() const { return st_.phase; }
  double remaining_budget() const { return cfg_.budget - st_.spent; }

  // Next-arm dispatch: seeded uniform arm during initialization, optimistic
  // scoring in the main phase, Model forced whenever the remaining budget
  // drops below the guard.
  Decision act(const Eigen::VectorXd& x);
  Decision act(const Eigen::VectorXd& x_model, const Eigen::VectorXd& x_human,
               const Eigen::VectorXd& x_cost);

  // The scored optimistic selection. Throws StateError during initialization.
  Decision select_arm(const Eigen::VectorXd& x) const;
  Decision select_arm(const Eigen::VectorXd& x_model, const Eigen::VectorXd& x_human,
                      const Eigen::VectorXd& x_cost) const;

  // Routes realized feedback into the estimators, charges the spend ledger,
  // and advances the round counter (flipping the phase once the design
  // condition or the cap is met). Throws ProtocolError when the feedback
  // shape does not match the mode and arm.
  void observe(const Eigen::VectorXd& x, const Decision& decision, const Observation& obs);
  void observe(const Eigen::VectorXd& x_model, const Eigen::VectorXd& x_human,
               const Eigen::VectorXd& x_cost, const Decision& decision, const Observation& obs);

  // g = gamma (cost - B/T); alpha <- alpha (1+eps)^g for g >= 0, else
  // alpha (1-eps)^(-g); gamma <- alpha / (1 + alpha).
  void update_dual(double incurred_cost);

  // beta(t) for one estimator under the configured time-index convention.
  double beta(const ArmEstimator& est) const;

 private:
  void maybe_finish_initialization();

  PolicyConfig cfg_;
  PolicyState st_;
  std::mt19937_64 rng_;
};

// One emitted trace row of an episode.
struct EpisodeRow {
  std::int64_t t = 0;
  Arm arm = Arm::Model;
  bool forced = false;
  double reward = 0.0;
  double cost = 0.0;
  double remaining_budget = 0.0;
  double gamma = 0.5;
  double score_model = 0.0;
  double score_human = 0.0;
  bool warmup = false;  // round was played during the initialization phase
};

namespace detail {

// Shared episode driver for the linear and neural policy variants.
template <typename Policy>
std::vector<EpisodeRow> drive_episode(Policy& policy, const PolicyConfig& cfg, RoundSource& env) {
  std::vector<EpisodeRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.horizon));
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    std::optional<RoundSample> sample = env.next();
    if (!sample) {
      throw TruncationError("environment exhausted after " + std::to_string(t - 1) + " of " +
                                std::to_string(cfg.horizon) + " rounds",
                            t - 1);
    }
    const bool warmup = policy.phase() == Phase::Initializing;
    const Decision decision = policy.act(sample->context);
    const double reward =
        decision.arm == Arm::Human ? sample->reward_human : sample->reward_model;
    const double incurred = decision.arm == Arm::Human ? sample->cost : 0.0;
    policy.observe(sample->context, decision,
                   make_observation(cfg.feedback, decision.arm, *sample));
    if (!warmup) policy.update_dual(incurred);
    rows.push_back({t, decision.arm, decision.forced, reward, incurred,
                    cfg.budget - policy.state().spent, policy.state().gamma,
                    decision.score_model, decision.score_human, warmup});
  }
  return rows;
}

}  // namespace detail

// Runs a full episode of cfg.horizon rounds against the environment.
// Throws TruncationError (carrying the completed round count) if the
// environment runs dry first.
std::vector<EpisodeRow> run_episode(const PolicyConfig& cfg, RoundSource& env);

}  // namespace defer
