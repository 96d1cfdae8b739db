#include <algorithm>
#include <atomic>
#include <functional>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "defer/errors.hpp"
#include "defer/experiment.hpp"
#include "defer/oracles.hpp"
#include "defer/rng.hpp"

namespace defer {

namespace {

struct ExperimentRound {
  RoundSample sample;
  double mean_model = 0.0;
  double mean_human = 0.0;
  double mean_cost = 0.0;
};

std::vector<ExperimentRound> build_synthetic_rounds(const ExperimentConfig& cfg,
                                                    std::uint64_t trial_seed) {
  const EnvironmentParams params = gen_params(cfg.regime, cfg.dim, derive_seed(trial_seed, 1));
  SyntheticContextDist dist(SyntheticContextConfig{cfg.dim, cfg.max_ones, cfg.lambda},
                            derive_seed(trial_seed, 2));
  LinearEnvironment env(params, cfg.links, cfg.noise_sigma, derive_seed(trial_seed, 3));

  std::vector<ExperimentRound> rounds(static_cast<std::size_t>(cfg.horizon));
  for (ExperimentRound& r : rounds) {
    r.sample.context = dist.sample();
    const RealizedOutcome o = env.realize(r.sample.context);
    r.sample.reward_model = o.reward_model;
    r.sample.reward_human = o.reward_human;
    r.sample.cost = o.cost;
    r.mean_model = env.mean_reward_model(r.sample.context);
    r.mean_human = env.mean_reward_human(r.sample.context);
    r.mean_cost = env.mean_cost(r.sample.context);
  }
  return rounds;
}

// Participant blocks are shuffled per trial; within-participant order is kept.
std::vector<ExperimentRound> build_replay_rounds(const std::vector<ReplayRow>& rows,
                                                 std::int64_t horizon,
                                                 std::uint64_t trial_seed) {
  const std::vector<ReplayRow> ordered = reorder_participants(rows, derive_seed(trial_seed, 5));
  std::vector<ExperimentRound> rounds;
  rounds.reserve(static_cast<std::size_t>(horizon));
  for (const ReplayRow& row : ordered) {
    if (rounds.size() == static_cast<std::size_t>(horizon)) break;
    ExperimentRound r;
    r.sample.context = row.features;
    r.sample.reward_model = row.reward_model;
    r.sample.reward_human = row.reward_human;
    r.sample.cost = row.cost;
    r.mean_model = row.reward_model;
    r.mean_human = row.reward_human;
    r.mean_cost = row.cost;
    rounds.push_back(std::move(r));
  }
  return rounds;
}

std::vector<OptRow> reporting_opt_rows(const std::vector<ExperimentRound>& rounds) {
  std::vector<OptRow> out(rounds.size());
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    out[i] = OptRow{rounds[i].mean_human - rounds[i].mean_model, rounds[i].mean_cost,
                    rounds[i].mean_model};
  }
  return out;
}

std::vector<OptRow> realized_opt_rows(const std::vector<ExperimentRound>& rounds) {
  std::vector<OptRow> out(rounds.size());
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    out[i] = OptRow{rounds[i].sample.reward_human - rounds[i].sample.reward_model,
                    rounds[i].sample.cost, rounds[i].sample.reward_model};
  }
  return out;
}

std::vector<OutcomeRow> outcome_rows(const std::vector<ExperimentRound>& rounds) {
  std::vector<OutcomeRow> out(rounds.size());
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    out[i] = OutcomeRow{rounds[i].mean_model, rounds[i].sample.reward_model,
                        rounds[i].sample.reward_human, rounds[i].sample.cost};
  }
  return out;
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
    out.push_back(ok ? c : '-');
  }
  return out;
}

void format_double(std::string& out, double v, const char* fmt) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

struct PendingTrace {
  std::filesystem::path path;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<TraceRow> rows;
};

void write_trace_file(const PendingTrace& trace) {
  std::string out;
  out.reserve(trace.rows.size() * 72 + 256);
  out += "#";
  for (const auto& [k, v] : trace.metadata) {
    out += ' ';
    out += k;
    out += '=';
    out += v;
  }
  out += "\ntrial,t,arm,forced,reward,cost,remaining_budget,gamma,cum_reward,cum_regret\n";
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.t);
    out += ',';
    out += r.arm == Arm::Human ? "human" : "model";
    out += ',';
    out += r.forced ? '1' : '0';
    format_double(out += ',', r.reward, "%.12g");
    format_double(out += ',', r.cost, "%.12g");
    format_double(out += ',', r.remaining_budget, "%.12g");
    format_double(out += ',', r.gamma, "%.12g");
    format_double(out += ',', r.cum_reward, "%.17g");
    format_double(out += ',', r.cum_regret, "%.17g");
    out += '\n';
  }
  std::ofstream file(trace.path, std::ios::binary);
  if (!file) throw Error("cannot write trace file: " + trace.path.string());
  file << out;
}

std::string format_value(double v, const char* fmt = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Per-round reward/cost/arm sequence of one algorithm, before the prefix
// bookkeeping against the optimum is attached.
struct AlgoRun {
  std::vector<EpisodeRow> rows;
};

AlgoRun run_from_plan(const std::vector<ExperimentRound>& rounds, const std::vector<bool>& deferred,
                      double budget) {
  AlgoRun run;
  run.rows.reserve(rounds.size());
  double spent = 0.0;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    EpisodeRow row;
    row.t = static_cast<std::int64_t>(i) + 1;
    row.arm = deferred[i] ? Arm::Human : Arm::Model;
    row.reward = deferred[i] ? rounds[i].sample.reward_human : rounds[i].sample.reward_model;
    row.cost = deferred[i] ? rounds[i].sample.cost : 0.0;
    spent += row.cost;
    row.remaining_budget = budget - spent;
    row.gamma = 0.0;
    run.rows.push_back(row);
  }
  return run;
}

AlgoRun run_from_opt(const std::vector<ExperimentRound>& rounds, const std::vector<OptRow>& basis,
                     const OptSolution& sol, double budget) {
  AlgoRun run;
  run.rows.reserve(rounds.size());
  double spent = 0.0;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    EpisodeRow row;
    row.t = static_cast<std::int64_t>(i) + 1;
    row.arm = sol.pi[i] > 0.0 ? Arm::Human : Arm::Model;
    row.reward = basis[i].base + sol.pi[i] * basis[i].gain;
    // The solution spends at most the budget; the min strips the rounding
    // dust a plain running sum can pick up over the fractional row.
    row.cost = std::min(sol.pi[i] * basis[i].cost, budget - spent);
    spent += row.cost;
    row.remaining_budget = budget - spent;
    row.gamma = 0.0;
    run.rows.push_back(row);
  }
  return run;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<ReplayRow> replay_rows;
  std::int64_t horizon = cfg.horizon;
  double budget_guard = cfg.budget_guard;
  if (cfg.is_replay()) {
    replay_rows = load_replay(cfg.replay_csv, cfg.replay_schema());
    const auto total = static_cast<std::int64_t>(replay_rows.size());
    if (horizon == 0) horizon = total;
    if (horizon > total) {
      throw ConfigError("experiment '" + cfg.name + "': T = " + std::to_string(horizon) +
                        " exceeds the " + std::to_string(total) + " dataset rows");
    }
    if (horizon < 2) throw ConfigError("experiment '" + cfg.name + "': needs at least 2 rounds");
    for (const ReplayRow& r : replay_rows) budget_guard = std::max(budget_guard, r.cost);
  }
  for (const BudgetSpec& b : cfg.budgets) {
    if (b.resolve(horizon) > static_cast<double>(horizon)) {
      throw ConfigError("experiment '" + cfg.name + "': budget '" + b.label + "' exceeds T");
    }
  }
  const int replay_dim =
      cfg.is_replay() ? static_cast<int>(replay_rows.front().features.size()) : cfg.dim;

  std::filesystem::create_directories(cfg.out_dir);
  const bool split_modes = cfg.feedback_modes.size() > 1;
  for (FeedbackMode mode : cfg.feedback_modes) {
    if (split_modes) std::filesystem::create_directories(cfg.out_dir / to_string(mode));
  }

  const int trials = cfg.effective_trials();
  std::vector<std::vector<TrialStats>> per_trial(static_cast<std::size_t>(trials));

  parallel_for(trials, cfg.jobs, [&](int trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const std::vector<ExperimentRound> rounds =
        cfg.is_replay() ? build_replay_rounds(replay_rows, horizon, trial_seed)
                        : build_synthetic_rounds(cfg, trial_seed);
    const std::vector<OptRow> reporting_rows = reporting_opt_rows(rounds);
    const std::vector<OptRow> realized_rows =
        cfg.is_replay() ? reporting_rows : realized_opt_rows(rounds);
    const std::vector<OutcomeRow> outcomes = outcome_rows(rounds);

    std::vector<TrialStats>& stats = per_trial[static_cast<std::size_t>(trial)];
    for (std::size_t budget_idx = 0; budget_idx < cfg.budgets.size(); ++budget_idx) {
      const BudgetSpec& budget_spec = cfg.budgets[budget_idx];
      const double budget = budget_spec.resolve(horizon);
      const OptSolution opt_reporting = opt_static_empirical(reporting_rows, budget);
      const OptSolution opt_realized =
          cfg.is_replay() ? opt_reporting : opt_static_empirical(realized_rows, budget);

      // Per-round reward the optimum collects on the same sequence; the
      // regret column is prefix sums against it.
      std::vector<double> opt_per_round(rounds.size());
      for (std::size_t i = 0; i < rounds.size(); ++i) {
        opt_per_round[i] = reporting_rows[i].base + opt_reporting.pi[i] * reporting_rows[i].gain;
      }

      for (std::size_t mode_idx = 0; mode_idx < cfg.feedback_modes.size(); ++mode_idx) {
        const FeedbackMode mode = cfg.feedback_modes[mode_idx];
        for (std::size_t algo_idx = 0; algo_idx < cfg.algorithms.size(); ++algo_idx) {
          const AlgorithmKind algo = cfg.algorithms[algo_idx];
          const std::uint64_t run_seed = derive_seed(
              derive_seed(derive_seed(trial_seed, 100 + budget_idx), 200 + algo_idx),
              300 + mode_idx);
          const std::uint64_t baseline_seed =
              derive_seed(derive_seed(trial_seed, 100 + budget_idx), 200 + algo_idx);

          AlgoRun algo_run;
          switch (algo) {
            case AlgorithmKind::Linear: {
              PolicyConfig pc;
              pc.horizon = horizon;
              pc.budget = budget;
              pc.dim = replay_dim;
              pc.feedback = mode;
              pc.links = cfg.links;
              pc.confidence = cfg.confidence;
              pc.ridge = cfg.ridge;
              pc.init_rounds_cap = cfg.init_rounds_cap;
              pc.budget_guard = budget_guard;
              pc.per_arm_time_index = cfg.per_arm_time_index;
              pc.seed = run_seed;
              std::vector<RoundSample> samples(rounds.size());
              for (std::size_t i = 0; i < rounds.size(); ++i) samples[i] = rounds[i].sample;
              VectorRoundSource src(std::move(samples));
              algo_run.rows = run_episode(pc, src);
              break;
            }
            case AlgorithmKind::NeuralLinear: {
              NeuralPolicyConfig nc;
              nc.policy.horizon = horizon;
              nc.policy.budget = budget;
              nc.policy.dim = replay_dim;
              nc.policy.feedback = mode;
              nc.policy.links = cfg.links;
              nc.policy.confidence = cfg.confidence;
              nc.policy.ridge = cfg.ridge;
              nc.policy.init_rounds_cap = cfg.init_rounds_cap;
              nc.policy.budget_guard = budget_guard;
              nc.policy.per_arm_time_index = cfg.per_arm_time_index;
              nc.policy.seed = run_seed;
              nc.hidden_dim = cfg.hidden_dim;
              nc.schedule = cfg.schedule;
              nc.learning_rate = cfg.learning_rate;
              nc.recompute_embeddings = cfg.recompute_embeddings;
              nc.seed = derive_seed(run_seed, 7);
              std::vector<RoundSample> samples(rounds.size());
              for (std::size_t i = 0; i < rounds.size(); ++i) samples[i] = rounds[i].sample;
              VectorRoundSource src(std::move(samples));
              algo_run.rows = run_neural_episode(nc, src);
              break;
            }
            case AlgorithmKind::ModelOnly:
            case AlgorithmKind::HumanOnly:
            case AlgorithmKind::ArbitraryHuman: {
              const BaselineKind kind = algo == AlgorithmKind::ModelOnly ? BaselineKind::ModelOnly
                                        : algo == AlgorithmKind::HumanOnly
                                            ? BaselineKind::HumanOnly
                                            : BaselineKind::ArbitraryHuman;
              const BaselinePlan plan = baseline_plan(kind, outcomes, budget, baseline_seed);
              algo_run = run_from_plan(rounds, plan.deferred, budget);
              break;
            }
            case AlgorithmKind::BestReject: {
              const RejectPolicy reject = best_reject(outcomes, budget);
              algo_run = run_from_plan(rounds, reject.deferred, budget);
              break;
            }
            case AlgorithmKind::Opt: {
              algo_run = run_from_opt(rounds, reporting_rows, opt_reporting, budget);
              break;
            }
          }

          PendingTrace trace;
          trace.rows.reserve(algo_run.rows.size());
          double cum_reward = 0.0;
          double cum_opt = 0.0;
          for (const EpisodeRow& row : algo_run.rows) {
            const bool included = !(cfg.exclude_warmup && row.warmup);
            if (included) {
              cum_reward += row.reward;
              cum_opt += opt_per_round[static_cast<std::size_t>(row.t - 1)];
            }
            TraceRow out;
            out.trial = trial;
            out.t = row.t;
            out.arm = row.arm;
            out.forced = row.forced;
            out.reward = row.reward;
            out.cost = row.cost;
            out.remaining_budget = row.remaining_budget;
            out.gamma = row.gamma;
            out.cum_reward = cum_reward;
            out.cum_regret = cum_opt - cum_reward;
            trace.rows.push_back(out);
          }
          const double opt_for_stats = cum_opt;

          TrialStats ts;
          ts.algo = algo;
          ts.budget_label = budget_spec.label;
          ts.budget_abs = budget;
          ts.feedback = mode;
          ts.trial = trial;
          ts.final_reward = trace.rows.empty() ? 0.0 : trace.rows.back().cum_reward;
          ts.final_regret = trace.rows.empty() ? 0.0 : trace.rows.back().cum_regret;
          ts.opt_value = opt_for_stats;
          ts.opt_realized_value = opt_realized.value;

          const std::filesystem::path dir =
              split_modes ? cfg.out_dir / to_string(mode) : cfg.out_dir;
          ts.trace_path = dir / ("trace_" + to_string(algo) + "_" +
                                 sanitize_label(budget_spec.label) + "_" +
                                 std::to_string(trial) + ".csv");

          trace.path = ts.trace_path;
          trace.metadata = {
              {"algo", to_string(algo)},
              {"kind", to_string(cfg.kind)},
              {"feedback", to_string(mode)},
              {"budget_label", sanitize_label(budget_spec.label)},
              {"budget", format_value(budget)},
              {"trial", std::to_string(trial)},
              {"T", std::to_string(horizon)},
              {"d", std::to_string(replay_dim)},
              {"seed", std::to_string(cfg.seed)},
              {"opt", format_value(opt_for_stats)},
              {"opt_realized", format_value(opt_realized.value)},
              {"exclude_warmup", cfg.exclude_warmup ? "1" : "0"},
          };
          write_trace_file(trace);
          stats.push_back(std::move(ts));
        }
      }
    }
  });

  RunResult result;
  result.out_dir = cfg.out_dir;
  for (const std::vector<TrialStats>& chunk : per_trial) {
    result.trials.insert(result.trials.end(), chunk.begin(), chunk.end());
  }
  result.summary = build_summary(result.trials);
  result.summary_path = cfg.out_dir / "summary.csv";
  write_summary_csv(result.summary_path, result.summary);
  return result;
}

}  // namespace defer
