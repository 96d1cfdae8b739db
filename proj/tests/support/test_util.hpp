#pragma once

// Shared helpers for the unit and acceptance suites: scratch directories,
// independent brute-force oracles, and synthetic replay dataset builders.

#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "defer/knapsack.hpp"
#include "defer/neural.hpp"
#include "defer/oracles.hpp"
#include "defer/replay.hpp"
#include "defer/rng.hpp"

namespace testutil {

inline std::filesystem::path scratch_dir(const std::string& tag) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("defer_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Independent oracle for the fractional deferral optimum: enumerate every
// deterministic deferral subset, refined per (subset, row) pair with both the
// exact budget-exhausting fraction and a 0.01 fraction grid. Exact for the
// LP because an optimal solution is a subset plus at most one fraction.
inline double enumerate_opt(const std::vector<defer::OptRow>& rows, double budget) {
  const int n = static_cast<int>(rows.size());
  double best = -1e300;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double cost = 0.0;
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
      value += rows[static_cast<std::size_t>(i)].base;
      if (mask & (1u << i)) {
        cost += rows[static_cast<std::size_t>(i)].cost;
        value += rows[static_cast<std::size_t>(i)].gain;
      }
    }
    if (cost > budget + 1e-12) continue;
    best = std::max(best, value);
    const double slack = budget - cost;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) continue;
      const auto& row = rows[static_cast<std::size_t>(j)];
      if (row.gain <= 0.0) continue;
      double fraction;
      if (row.cost <= 0.0) {
        fraction = 1.0;
      } else {
        fraction = std::min(1.0, slack / row.cost);
      }
      best = std::max(best, value + fraction * row.gain);
      for (int grid = 1; grid < 100; ++grid) {
        const double pi = 0.01 * grid;
        if (pi * row.cost <= slack + 1e-12) best = std::max(best, value + pi * row.gain);
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Central finite differences for the batch MSE gradient.
struct FlatGradient {
  std::vector<double> values;
};

inline std::vector<double*> parameter_pointers(defer::Mlp& net) {
  std::vector<double*> ptrs;
  for (int i = 0; i < net.w1.size(); ++i) ptrs.push_back(net.w1.data() + i);
  for (int i = 0; i < net.b1.size(); ++i) ptrs.push_back(net.b1.data() + i);
  for (int i = 0; i < net.w2.size(); ++i) ptrs.push_back(net.w2.data() + i);
  ptrs.push_back(&net.b2);
  return ptrs;
}

inline FlatGradient flatten(const defer::MlpGradient& g) {
  FlatGradient flat;
  flat.values.insert(flat.values.end(), g.w1.data(), g.w1.data() + g.w1.size());
  flat.values.insert(flat.values.end(), g.b1.data(), g.b1.data() + g.b1.size());
  flat.values.insert(flat.values.end(), g.w2.data(), g.w2.data() + g.w2.size());
  flat.values.push_back(g.b2);
  return flat;
}

inline FlatGradient finite_difference_gradient(defer::Mlp& net,
                                               std::span<const defer::Sample> batch,
                                               double h = 1e-5) {
  FlatGradient flat;
  for (double* p : parameter_pointers(net)) {
    const double saved = *p;
    *p = saved + h;
    const double up = defer::mse_loss(net, batch);
    *p = saved - h;
    const double down = defer::mse_loss(net, batch);
    *p = saved;
    flat.values.push_back((up - down) / (2.0 * h));
  }
  return flat;
}

inline double max_relative_error(const FlatGradient& a, const FlatGradient& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double den = std::max({1e-8, std::abs(a.values[i]), std::abs(b.values[i])});
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / den);
  }
  return worst;
}

// Smallest distance of any hidden pre-activation from the rectifier kink over
// the batch; finite differences are only trusted away from it.
inline double min_kink_distance(const defer::Mlp& net, std::span<const defer::Sample> batch) {
  double closest = 1e300;
  for (const defer::Sample& s : batch) {
    const Eigen::VectorXd pre = net.w1.transpose() * s.first + net.b1;
    closest = std::min(closest, pre.cwiseAbs().minCoeff());
  }
  return closest;
}

// ---------------------------------------------------------------------------
// Synthetic replay datasets.

// Knapsack-style rows: simulated participants solve generated instances; the
// model arm is the 4-pick ratio greedy. Features are the capacity-normalized
// weights and values, the capacity, summary statistics of weights, values and
// value/weight ratios, and the participant's cumulative average performance
// and time.
inline std::vector<defer::ReplayRow> make_knapsack_replay_rows(int participants,
                                                               int per_participant, int items,
                                                               std::uint64_t seed) {
  std::mt19937_64 rng = defer::make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<defer::ReplayRow> rows;

  for (int p = 0; p < participants; ++p) {
    const double skill = 0.7 + 0.3 * unit(rng);
    double cum_perf = 0.0;
    double cum_time = 0.0;
    for (int i = 0; i < per_participant; ++i) {
      const defer::KnapsackInstance inst = defer::gen_knapsack_instance(
          defer::derive_seed(seed, static_cast<std::uint64_t>(p * 1000 + i)), items);
      const auto v_max = static_cast<double>(defer::knapsack_exact(inst));
      const auto v_model = static_cast<double>(defer::ratiomax4(inst));
      const double fraction = std::clamp(skill + 0.1 * (unit(rng) - 0.5), 0.0, 1.0);
      const double v_human = std::floor(fraction * v_max);
      const double time_minutes = 0.5 + 2.5 * unit(rng);  // 3-minute limit
      const double cost = time_minutes / 3.0;

      std::vector<double> feats;
      const auto cap = static_cast<double>(inst.capacity);
      for (std::int64_t w : inst.weights) feats.push_back(static_cast<double>(w) / cap);
      for (std::int64_t v : inst.values) feats.push_back(static_cast<double>(v) / cap);
      feats.push_back(cap / 1000.0);
      const auto stats = [&feats](const std::vector<double>& xs) {
        double lo = xs[0], hi = xs[0], total = 0.0;
        for (double x : xs) {
          lo = std::min(lo, x);
          hi = std::max(hi, x);
          total += x;
        }
        const double mean = total / static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        feats.push_back(lo);
        feats.push_back(hi);
        feats.push_back(mean);
        feats.push_back(std::sqrt(ss / static_cast<double>(xs.size())));
      };
      std::vector<double> weights_d, values_d, ratios;
      for (std::int64_t w : inst.weights) weights_d.push_back(static_cast<double>(w) / 100.0);
      for (std::int64_t v : inst.values) values_d.push_back(static_cast<double>(v) / 100.0);
      for (std::size_t k = 0; k < weights_d.size(); ++k) ratios.push_back(values_d[k] / weights_d[k]);
      stats(weights_d);
      stats(values_d);
      stats(ratios);
      feats.push_back(i > 0 ? cum_perf / i : 0.0);
      feats.push_back(i > 0 ? cum_time / i : 0.0);

      defer::ReplayRow row;
      row.participant_id = "p" + std::to_string(p);
      row.features = Eigen::Map<Eigen::VectorXd>(feats.data(), static_cast<Eigen::Index>(feats.size()));
      row.reward_human = defer::knapsack_reward(v_human, v_max);
      row.reward_model = defer::knapsack_reward(v_model, v_max);
      row.cost = cost;
      rows.push_back(std::move(row));

      cum_perf += v_human / v_max;
      cum_time += cost;
    }
  }
  return rows;
}

// ImageNet-style rows: 16-way one-hot model class, logits, max logit, and the
// participant's cumulative mean cost and accuracy. Rewards are 1 on a correct
// prediction, 0 otherwise.
inline std::vector<defer::ReplayRow> make_imagenet_replay_rows(int participants,
                                                               int per_participant,
                                                               std::uint64_t seed) {
  std::mt19937_64 rng = defer::make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> klass(0, 15);
  std::vector<defer::ReplayRow> rows;

  for (int p = 0; p < participants; ++p) {
    const double human_acc = 0.6 + 0.35 * unit(rng);
    double cum_cost = 0.0;
    double cum_correct = 0.0;
    for (int i = 0; i < per_participant; ++i) {
      const int truth = klass(rng);
      const bool model_right = unit(rng) < 0.75;
      const int model_class = model_right ? truth : klass(rng);
      const bool human_right = unit(rng) < human_acc;
      const double cost = 0.5 + 2.0 * unit(rng);

      std::vector<double> feats(16 + 16 + 1 + 2, 0.0);
      feats[static_cast<std::size_t>(model_class)] = 1.0;
      double max_logit = -1e300;
      for (int c = 0; c < 16; ++c) {
        const double logit = (c == model_class ? 2.0 : 0.0) + unit(rng);
        feats[static_cast<std::size_t>(16 + c)] = logit;
        max_logit = std::max(max_logit, logit);
      }
      feats[32] = max_logit;
      feats[33] = i > 0 ? cum_cost / i : 0.0;
      feats[34] = i > 0 ? cum_correct / i : 0.0;

      defer::ReplayRow row;
      row.participant_id = "p" + std::to_string(p);
      row.features = Eigen::Map<Eigen::VectorXd>(feats.data(), static_cast<Eigen::Index>(feats.size()));
      row.reward_model = (model_class == truth) ? 1.0 : 0.0;
      row.reward_human = human_right ? 1.0 : 0.0;
      row.cost = cost;
      rows.push_back(std::move(row));

      cum_cost += cost;
      cum_correct += human_right ? 1.0 : 0.0;
    }
  }
  return rows;
}

}  // namespace testutil
