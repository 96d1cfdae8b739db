#include "defer/policy.hpp"

#include <cmath>
#include <limits>

#include "defer/rng.hpp"

namespace defer {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double PolicyConfig::epsilon() const { return std::sqrt(2.0 / static_cast<double>(horizon)); }

std::int64_t PolicyConfig::effective_init_cap() const {
  return init_rounds_cap > 0 ? init_rounds_cap : 4 * static_cast<std::int64_t>(dim);
}

void PolicyConfig::validate() const {
  if (horizon < 2) throw ConfigError("policy horizon must be >= 2 (the dual step is sqrt(2/T))");
  if (!(budget >= 0.0)) throw ConfigError("policy budget must be >= 0");
  if (budget > static_cast<double>(horizon)) {
    throw ConfigError("policy budget must not exceed the horizon (per-round costs are in [0,1])");
  }
  if (dim < 1) throw ConfigError("policy dim must be >= 1");
  if (!(ridge > 0.0)) throw ConfigError("policy ridge must be > 0");
  if (!(budget_guard >= 0.0)) throw ConfigError("budget_guard must be >= 0");
  if (init_rounds_cap < 0) throw ConfigError("init_rounds_cap must be positive (or 0 for the default)");
  try {
    confidence.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

Observation make_observation(FeedbackMode mode, Arm arm, const RoundSample& sample) {
  Observation obs;
  if (mode == FeedbackMode::FullInformation) {
    obs.reward_model = sample.reward_model;
    if (arm == Arm::Human) {
      obs.reward_human = sample.reward_human;
      obs.cost = sample.cost;
    }
  } else {
    if (arm == Arm::Model) {
      obs.reward_model = sample.reward_model;
    } else {
      obs.reward_human = sample.reward_human;
      obs.cost = sample.cost;
    }
  }
  return obs;
}

DeferralPolicy::DeferralPolicy(PolicyConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  st_.est_model = ArmEstimator(cfg_.dim, cfg_.ridge, cfg_.links.reward_model);
  st_.est_human = ArmEstimator(cfg_.dim, cfg_.ridge, cfg_.links.reward_human);
  st_.est_cost = ArmEstimator(cfg_.dim, cfg_.ridge, cfg_.links.cost);
  rng_ = make_rng(cfg_.seed);
}

double DeferralPolicy::beta(const ArmEstimator& est) const {
  const std::int64_t t = cfg_.per_arm_time_index ? std::max<std::int64_t>(1, est.observation_count())
                                                 : st_.round + 1;
  return confidence_radius(cfg_.confidence, t, cfg_.dim);
}

Decision DeferralPolicy::act(const Eigen::VectorXd& x) { return act(x, x, x); }

Decision DeferralPolicy::act(const Eigen::VectorXd& x_model, const Eigen::VectorXd& x_human,
                             const Eigen::VectorXd& x_cost) {
  if (remaining_budget() < cfg_.budget_guard) {
    return Decision{Arm::Model, kNaN, kNaN, true};
  }
  if (st_.phase == Phase::Initializing) {
    const Arm arm = (rng_() & 1u) ? Arm::Human : Arm::Model;
    return Decision{arm, kNaN, kNaN, false};
  }
  return select_arm(x_model, x_human, x_cost);
}

Decision DeferralPolicy::select_arm(const Eigen::VectorXd& x) const { return select_arm(x, x, x); }

Decision DeferralPolicy::select_arm(const Eigen::VectorXd& x_model,
                                    const Eigen::VectorXd& x_human,
                                    const Eigen::VectorXd& x_cost) const {
  if (st_.phase != Phase::Main) {
    throw StateError("select_arm requires the main phase; the policy is still initializing");
  }
  Decision decision;
  decision.score_model = st_.est_model.optimistic_mean(x_model, beta(st_.est_model),
                                                       OptimisticDirection::RewardUp);
  const double human_reward = st_.est_human.optimistic_mean(x_human, beta(st_.est_human),
                                                            OptimisticDirection::RewardUp);
  // Deferral is the only priced action; the Model arm's cost term is 0. The
  // estimated price is floored at zero since costs are nonnegative.
  const double price = std::max(
      0.0, st_.est_cost.optimistic_mean(x_cost, beta(st_.est_cost), OptimisticDirection::CostDown));
  const double weight =
      (static_cast<double>(cfg_.horizon) / cfg_.budget) * st_.gamma;
  decision.score_human = human_reward - weight * price;
  decision.arm = decision.score_human > decision.score_model ? Arm::Human : Arm::Model;
  decision.forced = false;
  return decision;
}

void DeferralPolicy::observe(const Eigen::VectorXd& x, const Decision& decision,
                             const Observation& obs) {
  observe(x, x, x, decision, obs);
}

void DeferralPolicy::observe(const Eigen::VectorXd& x_model, const Eigen::VectorXd& x_human,
                             const Eigen::VectorXd& x_cost, const Decision& decision,
                             const Observation& obs) {
  const bool human = decision.arm == Arm::Human;
  if (cfg_.feedback == FeedbackMode::FullInformation) {
    if (!obs.reward_model) {
      throw ProtocolError("full information always carries the model reward");
    }
    if (human != obs.reward_human.has_value() || human != obs.cost.has_value()) {
      throw ProtocolError("human reward and cost must be present iff the Human arm was played");
    }
  } else {
    if (human == obs.reward_model.has_value()) {
      throw ProtocolError("pure bandit carries the model reward iff the Model arm was played");
    }
    if (human != obs.reward_human.has_value() || human != obs.cost.has_value()) {
      throw ProtocolError("pure bandit carries human reward and cost iff the Human arm was played");
    }
  }

  if (obs.cost) {
    if (!std::isfinite(*obs.cost) || *obs.cost < 0.0) {
      throw DomainError("observed cost must be finite and >= 0");
    }
  }

  if (obs.reward_model) st_.est_model.update(x_model, *obs.reward_model);
  if (obs.reward_human) st_.est_human.update(x_human, *obs.reward_human);
  if (obs.cost) {
    st_.est_cost.update(x_cost, *obs.cost);
    st_.spent += *obs.cost;
    if (st_.spent > cfg_.budget + 1e-9) {
      throw BudgetError("spend ledger exceeded the budget; budget_guard must dominate the maximum per-round cost");
    }
  }

  ++st_.round;
  if (st_.phase == Phase::Initializing) maybe_finish_initialization();
}

void DeferralPolicy::maybe_finish_initialization() {
  if (st_.round >= cfg_.effective_init_cap()) {
    st_.phase = Phase::Main;
    return;
  }
  if (st_.est_model.min_eigenvalue_unridged() >= 1.0 &&
      st_.est_human.min_eigenvalue_unridged() >= 1.0 &&
      st_.est_cost.min_eigenvalue_unridged() >= 1.0) {
    st_.phase = Phase::Main;
  }
}

void DeferralPolicy::update_dual(double incurred_cost) {
  if (!std::isfinite(incurred_cost) || incurred_cost < 0.0) {
    throw DomainError("incurred cost must be finite and >= 0");
  }
  const double eps = cfg_.epsilon();
  const double g =
      st_.gamma * (incurred_cost - cfg_.budget / static_cast<double>(cfg_.horizon));
  if (g >= 0.0) {
    st_.alpha *= std::pow(1.0 + eps, g);
  } else {
    st_.alpha *= std::pow(1.0 - eps, -g);
  }
  st_.gamma = st_.alpha / (1.0 + st_.alpha);
}

std::vector<EpisodeRow> run_episode(const PolicyConfig& cfg, RoundSource& env) {
  DeferralPolicy policy(cfg);
  return detail::drive_episode(policy, cfg, env);
}

}  // namespace defer
