#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "defer/environment.hpp"
#include "defer/neural.hpp"
#include "defer/policy.hpp"
#include "defer/replay.hpp"

namespace defer {

enum class ExperimentKind { Synthetic1, Synthetic2, KnapsackReplay, ImageNetReplay };

enum class AlgorithmKind { Linear, NeuralLinear, ModelOnly, HumanOnly, ArbitraryHuman, BestReject, Opt };

std::string to_string(ExperimentKind kind);
std::string to_string(AlgorithmKind algo);
std::string to_string(FeedbackMode mode);
std::string to_string(ParamRegime regime);

// A budget given either absolutely or as a fraction of the horizon
// (e.g. "3200" or "0.16T"). The label is what appears in file names.
struct BudgetSpec {
  double value = 0.0;
  bool fraction_of_horizon = false;
  std::string label;

  double resolve(std::int64_t horizon) const {
    return fraction_of_horizon ? value * static_cast<double>(horizon) : value;
  }
};

BudgetSpec parse_budget(const std::string& token);

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Synthetic1;
  std::int64_t horizon = 0;  // replay kinds: 0 means the whole dataset
  int dim = 20;
  std::vector<BudgetSpec> budgets;
  int trials = 0;  // 0 picks the per-kind default (100 / 20 / 20)
  std::vector<FeedbackMode> feedback_modes = {FeedbackMode::FullInformation};
  std::vector<AlgorithmKind> algorithms = {
      AlgorithmKind::Linear,       AlgorithmKind::ModelOnly,  AlgorithmKind::HumanOnly,
      AlgorithmKind::ArbitraryHuman, AlgorithmKind::BestReject, AlgorithmKind::Opt};
  ParamRegime regime = ParamRegime::UniformRandom;
  double noise_sigma = 0.1;
  ConfidenceConfig confidence;
  double ridge = 1.0;
  LinkSet links;
  std::filesystem::path replay_csv;
  std::int64_t init_rounds_cap = 0;
  double budget_guard = 1.0;  // auto-raised to the dataset's max cost on replay runs
  bool per_arm_time_index = false;
  bool exclude_warmup = false;
  // Context distribution (synthetic kinds).
  int max_ones = 8;
  double lambda = 0.3;
  // Neural variant knobs.
  int hidden_dim = 50;
  TrainSchedule schedule{100, 0, 0, 500};
  double learning_rate = 0.0005;
  bool recompute_embeddings = true;

  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  int jobs = 0;  // 0 means hardware concurrency

  int effective_trials() const;
  ReplaySchema replay_schema() const;
  bool is_replay() const;
  void validate() const;  // throws ConfigError before any computation
};

// Parses the flat key = value config format, one [section] per experiment;
// keys above the first section act as defaults for every section.
std::vector<ExperimentConfig> parse_config_text(const std::string& text,
                                                const std::filesystem::path& base_dir);
std::vector<ExperimentConfig> parse_config_file(const std::filesystem::path& path);

// One emitted result row: per-round columns plus prefix sums against the
// empirical optimum of the same realized sequence.
struct TraceRow {
  int trial = 0;
  std::int64_t t = 0;
  Arm arm = Arm::Model;
  bool forced = false;
  double reward = 0.0;
  double cost = 0.0;
  double remaining_budget = 0.0;
  double gamma = 0.0;
  double cum_reward = 0.0;
  double cum_regret = 0.0;
};

struct Trace {
  std::map<std::string, std::string> metadata;
  std::vector<TraceRow> rows;
};

Trace read_trace(const std::filesystem::path& path);

struct TrialStats {
  AlgorithmKind algo = AlgorithmKind::Linear;
  std::string budget_label;
  double budget_abs = 0.0;
  FeedbackMode feedback = FeedbackMode::FullInformation;
  int trial = 0;
  double final_reward = 0.0;
  double final_regret = 0.0;
  double opt_value = 0.0;           // regret reference (expected basis on synthetic runs)
  double opt_realized_value = 0.0;  // optimum of the realized rows
  std::filesystem::path trace_path;
};

struct SummaryRow {
  std::string algo;
  std::string budget_label;
  std::string feedback;
  int trials = 0;
  double mean_final_reward = 0.0;
  double std_final_reward = 0.0;
  double mean_final_regret = 0.0;
  double std_final_regret = 0.0;
  double mean_pct_of_opt = 0.0;
  double std_pct_of_opt = 0.0;
};

struct RunResult {
  std::vector<TrialStats> trials;
  std::vector<SummaryRow> summary;
  std::filesystem::path out_dir;
  std::filesystem::path summary_path;
};

// Runs every (algorithm, feedback, budget, trial) cell of the experiment:
// builds the trial's realized row sequence once, runs each algorithm over
// it, scores the empirical optimum on the identical sequence, and writes
// per-trial trace CSVs plus summary.csv under the output directory.
// Deterministic under (config, seed); trials run in parallel.
RunResult run_experiment(const ExperimentConfig& cfg);

// Aggregates per-trial stats into per-(algorithm, budget, feedback) means and
// population standard deviations, ordered deterministically.
std::vector<SummaryRow> build_summary(const std::vector<TrialStats>& stats);

// Recomputes the summary from the trace files under a directory (recursive).
// Throws AggregationError when traces with incompatible configurations are
// mixed.
std::vector<SummaryRow> summarize_directory(const std::filesystem::path& dir);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

}  // namespace defer
