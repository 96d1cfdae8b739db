#include "defer/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "defer/errors.hpp"
#include "defer/rng.hpp"

namespace defer {

namespace {

// Compensated (Kahan) accumulator; the dominance orderings between oracle
// values are asserted at 1e-9 over tens of thousands of terms.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - compensation_;
    const double t = total_ + y;
    compensation_ = (t - total_) - y;
    total_ = t;
  }
  double value() const { return total_; }

 private:
  double total_ = 0.0;
  double compensation_ = 0.0;
};

double plan_value(const std::vector<OutcomeRow>& rows, const std::vector<bool>& deferred) {
  KahanSum sum;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sum.add(deferred[i] ? rows[i].reward_human : rows[i].reward_model);
  }
  return sum.value();
}

}  // namespace

OptSolution opt_static_empirical(const std::vector<OptRow>& rows, double budget) {
  if (!(budget >= 0.0)) throw DomainError("opt_static_empirical requires budget >= 0");
  for (const OptRow& r : rows) {
    if (!(r.cost >= 0.0)) throw DomainError("opt_static_empirical requires costs >= 0");
  }

  OptSolution sol;
  sol.pi.assign(rows.size(), 0.0);

  KahanSum value;
  for (const OptRow& r : rows) value.add(r.base);

  std::vector<std::size_t> priced;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].gain <= 0.0) continue;
    if (rows[i].cost == 0.0) {
      sol.pi[i] = 1.0;
      value.add(rows[i].gain);
    } else {
      priced.push_back(i);
    }
  }
  std::stable_sort(priced.begin(), priced.end(), [&rows](std::size_t a, std::size_t b) {
    return rows[a].gain * rows[b].cost > rows[b].gain * rows[a].cost;
  });

  KahanSum spent;
  for (std::size_t i : priced) {
    const double remaining = budget - spent.value();
    if (!(remaining > 0.0)) break;
    if (rows[i].cost <= remaining) {
      sol.pi[i] = 1.0;
      spent.add(rows[i].cost);
      value.add(rows[i].gain);
    } else {
      const double fraction = remaining / rows[i].cost;
      sol.pi[i] = fraction;
      spent.add(fraction * rows[i].cost);
      value.add(fraction * rows[i].gain);
      break;
    }
  }
  sol.value = value.value();
  sol.spent = spent.value();
  return sol;
}

RejectPolicy best_reject(const std::vector<OutcomeRow>& rows, double budget) {
  RejectPolicy best;
  best.threshold = 0.0;
  best.value = -std::numeric_limits<double>::infinity();

  std::vector<bool> deferred(rows.size(), false);
  for (int step = 0; step <= 100; ++step) {
    const double threshold = static_cast<double>(step) / 100.0;
    double spent = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool defer =
          rows[i].expected_model < threshold && spent + rows[i].cost <= budget;
      deferred[i] = defer;
      if (defer) spent += rows[i].cost;
    }
    const double value = plan_value(rows, deferred);
    if (value > best.value) {
      best.threshold = threshold;
      best.value = value;
      best.deferred = deferred;
    }
  }
  return best;
}

BaselinePlan baseline_plan(BaselineKind kind, const std::vector<OutcomeRow>& rows, double budget,
                           std::uint64_t seed) {
  BaselinePlan plan;
  plan.deferred.assign(rows.size(), false);

  switch (kind) {
    case BaselineKind::ModelOnly:
      break;
    case BaselineKind::HumanOnly: {
      double spent = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (spent + rows[i].cost <= budget) {
          plan.deferred[i] = true;
          spent += rows[i].cost;
        }
      }
      break;
    }
    case BaselineKind::ArbitraryHuman: {
      std::vector<std::size_t> order(rows.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng = make_rng(seed);
      std::shuffle(order.begin(), order.end(), rng);
      double spent = 0.0;
      for (std::size_t i : order) {
        if (spent + rows[i].cost <= budget) {
          plan.deferred[i] = true;
          spent += rows[i].cost;
        }
      }
      break;
    }
  }
  plan.value = plan_value(rows, plan.deferred);
  return plan;
}

double baseline(BaselineKind kind, const std::vector<OutcomeRow>& rows, double budget,
                std::uint64_t seed) {
  return baseline_plan(kind, rows, budget, seed).value;
}

std::int64_t ratiomax4(const KnapsackInstance& inst) {
  std::vector<int> eligible;
  for (int i = 0; i < inst.item_count(); ++i) {
    if (inst.weights[static_cast<std::size_t>(i)] <= inst.capacity) eligible.push_back(i);
  }

  std::int64_t total_weight = 0;
  std::int64_t total_value = 0;
  for (int picks = 0; picks < 4 && !eligible.empty(); ++picks) {
    // argmax v/w; exact integer cross-multiplication, ties to the lower index
    int best = eligible.front();
    for (int i : eligible) {
      if (inst.values[static_cast<std::size_t>(i)] * inst.weights[static_cast<std::size_t>(best)] >
          inst.values[static_cast<std::size_t>(best)] * inst.weights[static_cast<std::size_t>(i)]) {
        best = i;
      }
    }
    total_weight += inst.weights[static_cast<std::size_t>(best)];
    total_value += inst.values[static_cast<std::size_t>(best)];

    std::vector<int> next;
    for (int i : eligible) {
      if (i == best) continue;
      if (total_weight + inst.weights[static_cast<std::size_t>(i)] <= inst.capacity) next.push_back(i);
    }
    eligible.swap(next);
  }
  return total_value;
}

std::int64_t knapsack_exact(const KnapsackInstance& inst) {
  const int m = inst.item_count();
  if (m < 1) throw DomainError("knapsack_exact requires at least one item");

  if (m <= 25) {
    // Gray-code walk over all subsets with incremental weight/value updates.
    const std::uint32_t subsets = 1u << m;
    std::int64_t weight = 0;
    std::int64_t value = 0;
    std::int64_t best = 0;
    std::uint32_t prev_gray = 0;
    for (std::uint32_t i = 1; i < subsets; ++i) {
      const std::uint32_t gray = i ^ (i >> 1);
      const std::uint32_t flipped = gray ^ prev_gray;
      const int bit = std::countr_zero(flipped);
      if (gray & flipped) {
        weight += inst.weights[static_cast<std::size_t>(bit)];
        value += inst.values[static_cast<std::size_t>(bit)];
      } else {
        weight -= inst.weights[static_cast<std::size_t>(bit)];
        value -= inst.values[static_cast<std::size_t>(bit)];
      }
      prev_gray = gray;
      if (weight <= inst.capacity && value > best) best = value;
    }
    return best;
  }

  constexpr std::int64_t kMaxDpCapacity = 10'000'000;
  if (inst.capacity > kMaxDpCapacity) {
    throw CapabilityError("knapsack instance outside solver ranges (items > 25 and capacity > " +
                          std::to_string(kMaxDpCapacity) + ")");
  }
  std::vector<std::int64_t> dp(static_cast<std::size_t>(inst.capacity) + 1, 0);
  for (int i = 0; i < m; ++i) {
    const std::int64_t w = inst.weights[static_cast<std::size_t>(i)];
    const std::int64_t v = inst.values[static_cast<std::size_t>(i)];
    for (std::int64_t c = inst.capacity; c >= w; --c) {
      dp[static_cast<std::size_t>(c)] =
          std::max(dp[static_cast<std::size_t>(c)], dp[static_cast<std::size_t>(c - w)] + v);
    }
  }
  return dp[static_cast<std::size_t>(inst.capacity)];
}

double knapsack_reward(double value, double value_max) {
  if (!(value_max > 0.0)) throw DomainError("knapsack_reward requires value_max > 0");
  if (!(value >= 0.0)) throw DomainError("knapsack_reward requires value >= 0");
  if (value > value_max) throw DomainError("knapsack_reward requires value <= value_max");
  const double ratio = value / value_max;
  if (ratio == 1.0) return 1.0;  // exact at the top end
  return 0.1 / (1.1 - ratio);
}

}  // namespace defer
