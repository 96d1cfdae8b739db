#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "defer/errors.hpp"
#include "defer/experiment.hpp"

namespace defer {

namespace {

AlgorithmKind algo_from_string(const std::string& name) {
  if (name == "linear") return AlgorithmKind::Linear;
  if (name == "neural") return AlgorithmKind::NeuralLinear;
  if (name == "model_only") return AlgorithmKind::ModelOnly;
  if (name == "human_only") return AlgorithmKind::HumanOnly;
  if (name == "arbitrary_human") return AlgorithmKind::ArbitraryHuman;
  if (name == "best_reject") return AlgorithmKind::BestReject;
  if (name == "opt") return AlgorithmKind::Opt;
  throw AggregationError("unknown algorithm in trace metadata: '" + name + "'");
}

double metadata_real(const Trace& trace, const std::string& key) {
  const auto it = trace.metadata.find(key);
  if (it == trace.metadata.end()) throw AggregationError("trace metadata missing key '" + key + "'");
  return std::stod(it->second);
}

std::string metadata_str(const Trace& trace, const std::string& key) {
  const auto it = trace.metadata.find(key);
  if (it == trace.metadata.end()) throw AggregationError("trace metadata missing key '" + key + "'");
  return it->second;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Population convention: divide by N.
MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path.string());

  Trace trace;
  std::string line;
  if (!std::getline(in, line)) throw AggregationError("trace file is empty: " + path.string());
  if (line.empty() || line.front() != '#') {
    throw AggregationError("trace file missing metadata line: " + path.string());
  }
  {
    std::stringstream ss(line.substr(1));
    std::string token;
    while (ss >> token) {
      const std::size_t eq = token.find('=');
      if (eq == std::string::npos) continue;
      trace.metadata[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }
  if (!std::getline(in, line)) throw AggregationError("trace file missing header: " + path.string());
  if (line.rfind("trial,t,arm,forced,", 0) != 0) {
    throw AggregationError("unexpected trace columns in " + path.string());
  }

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10) throw ParseError("trace row must have 10 fields", line_no);
    TraceRow row;
    row.trial = std::stoi(fields[0]);
    row.t = std::stoll(fields[1]);
    row.arm = fields[2] == "human" ? Arm::Human : Arm::Model;
    row.forced = fields[3] == "1";
    row.reward = std::stod(fields[4]);
    row.cost = std::stod(fields[5]);
    row.remaining_budget = std::stod(fields[6]);
    row.gamma = std::stod(fields[7]);
    row.cum_reward = std::stod(fields[8]);
    row.cum_regret = std::stod(fields[9]);
    trace.rows.push_back(row);
  }
  return trace;
}

std::vector<SummaryRow> build_summary(const std::vector<TrialStats>& stats) {
  if (stats.empty()) throw AggregationError("summary requires at least one trace");

  struct Key {
    std::string feedback;
    std::string algo;
    double budget_abs;
    std::string budget_label;
    bool operator<(const Key& other) const {
      return std::tie(feedback, algo, budget_abs, budget_label) <
             std::tie(other.feedback, other.algo, other.budget_abs, other.budget_label);
    }
  };

  std::map<Key, std::vector<const TrialStats*>> groups;
  for (const TrialStats& s : stats) {
    groups[Key{to_string(s.feedback), to_string(s.algo), s.budget_abs, s.budget_label}].push_back(&s);
  }

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    std::set<int> trials;
    for (const TrialStats* s : members) {
      if (!trials.insert(s->trial).second) {
        throw AggregationError("duplicate trial " + std::to_string(s->trial) + " for " + key.algo +
                               " / " + key.budget_label + " / " + key.feedback);
      }
    }
    std::vector<double> rewards, regrets, pcts;
    for (const TrialStats* s : members) {
      rewards.push_back(s->final_reward);
      regrets.push_back(s->final_regret);
      pcts.push_back(std::abs(s->opt_value) > 0.0
                         ? 100.0 * s->final_reward / s->opt_value
                         : std::numeric_limits<double>::quiet_NaN());
    }
    const MeanStd reward = mean_std(rewards);
    const MeanStd regret = mean_std(regrets);
    const MeanStd pct = mean_std(pcts);
    SummaryRow row;
    row.algo = key.algo;
    row.budget_label = key.budget_label;
    row.feedback = key.feedback;
    row.trials = static_cast<int>(members.size());
    row.mean_final_reward = reward.mean;
    row.std_final_reward = reward.std;
    row.mean_final_regret = regret.mean;
    row.std_final_regret = regret.std;
    row.mean_pct_of_opt = pct.mean;
    row.std_pct_of_opt = pct.std;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SummaryRow> summarize_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir)) throw AggregationError("no such directory: " + dir.string());

  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw AggregationError("no trace files under " + dir.string());

  std::vector<TrialStats> stats;
  std::string kind;
  std::string horizon;
  std::string dim;
  for (const std::filesystem::path& path : paths) {
    const Trace trace = read_trace(path);
    if (trace.rows.empty()) throw AggregationError("trace has no rows: " + path.string());
    if (kind.empty()) {
      kind = metadata_str(trace, "kind");
      horizon = metadata_str(trace, "T");
      dim = metadata_str(trace, "d");
    } else if (kind != metadata_str(trace, "kind") || horizon != metadata_str(trace, "T") ||
               dim != metadata_str(trace, "d")) {
      throw AggregationError("mixed experiment configurations under " + dir.string() +
                             " (offending file: " + path.string() + ")");
    }
    TrialStats s;
    s.algo = algo_from_string(metadata_str(trace, "algo"));
    s.budget_label = metadata_str(trace, "budget_label");
    s.budget_abs = metadata_real(trace, "budget");
    s.feedback = metadata_str(trace, "feedback") == "bandit" ? FeedbackMode::PureBandit
                                                             : FeedbackMode::FullInformation;
    s.trial = static_cast<int>(metadata_real(trace, "trial"));
    s.final_reward = trace.rows.back().cum_reward;
    s.final_regret = trace.rows.back().cum_regret;
    s.opt_value = metadata_real(trace, "opt");
    s.opt_realized_value = metadata_real(trace, "opt_realized");
    s.trace_path = path;
    stats.push_back(std::move(s));
  }
  return build_summary(stats);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write summary file: " + path.string());
  out << "algo,budget,feedback,trials,mean_final_reward,std_final_reward,"
         "mean_final_regret,std_final_regret,mean_pct_of_opt,std_pct_of_opt\n";
  for (const SummaryRow& r : rows) {
    out << r.algo << ',' << r.budget_label << ',' << r.feedback << ',' << r.trials << ','
        << format_cell(r.mean_final_reward) << ',' << format_cell(r.std_final_reward) << ','
        << format_cell(r.mean_final_regret) << ',' << format_cell(r.std_final_regret) << ','
        << format_cell(r.mean_pct_of_opt) << ',' << format_cell(r.std_pct_of_opt) << '\n';
  }
}

}  // namespace defer
