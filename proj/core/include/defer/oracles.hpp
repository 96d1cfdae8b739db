#pragma once

#include <cstdint>
#include <vector>

#include "defer/knapsack.hpp"

namespace defer {

// One round as the offline comparators see it: base is the value collected
// without deferring, gain the increment for deferring, cost the price.
struct OptRow {
  double gain = 0.0;
  double cost = 0.0;
  double base = 0.0;
};

struct OptSolution {
  double value = 0.0;          // sum of base + pi * gain
  std::vector<double> pi;      // per-round deferral fractions in [0, 1]
  double spent = 0.0;          // sum of pi * cost
};

// Exact fractional relaxation by greedy ratio: zero-cost positive-gain rounds
// are taken fully, remaining positive-gain rounds by gain/cost descending,
// the last one fractionally to exhaust the budget. At most one fraction is
// strictly interior. Throws DomainError on negative costs or budget.
OptSolution opt_static_empirical(const std::vector<OptRow>& rows, double budget);

// One round as the simulated single-policy comparators see it. expected_model
// drives the rejection threshold; the realized columns are what gets
// collected.
struct OutcomeRow {
  double expected_model = 0.0;
  double reward_model = 0.0;
  double reward_human = 0.0;
  double cost = 0.0;
};

struct RejectPolicy {
  double threshold = 0.0;
  double value = 0.0;
  std::vector<bool> deferred;
};

// Sweeps thresholds {0.00, 0.01, ..., 1.00}: defer whenever the expected
// model reward is below the threshold and the budget still covers the cost.
// Returns the best threshold (smallest on ties) with its total realized
// reward. Offline-only comparator.
RejectPolicy best_reject(const std::vector<OutcomeRow>& rows, double budget);

enum class BaselineKind { ModelOnly, HumanOnly, ArbitraryHuman };

struct BaselinePlan {
  double value = 0.0;
  std::vector<bool> deferred;
};

// ModelOnly never defers; HumanOnly defers while the budget covers the cost;
// ArbitraryHuman defers on a seeded uniform-random subset until the budget is
// depleted.
BaselinePlan baseline_plan(BaselineKind kind, const std::vector<OutcomeRow>& rows, double budget,
                           std::uint64_t seed);
double baseline(BaselineKind kind, const std::vector<OutcomeRow>& rows, double budget,
                std::uint64_t seed);

// Greedy heuristic: repeatedly picks the best value/weight ratio item that
// still fits (ties toward the lower index), at most four picks. Items whose
// weight alone exceeds the capacity never qualify.
std::int64_t ratiomax4(const KnapsackInstance& inst);

// Exact 0-1 optimum: exhaustive subset search up to 25 items, else
// capacity-indexed dynamic programming. Throws CapabilityError for instances
// outside both ranges.
std::int64_t knapsack_exact(const KnapsackInstance& inst);

// 0.1 / (1.1 - V / V_max); equals 1 exactly at V = V_max. Throws DomainError
// unless 0 <= V <= V_max and V_max > 0.
double knapsack_reward(double value, double value_max);

}  // namespace defer
