#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "defer/errors.hpp"
#include "defer/experiment.hpp"

namespace defer {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse number '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse integer '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse unsigned integer '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

LinkFunction parse_link(const std::string& key, const std::string& value) {
  if (value == "identity") return LinkFunction::identity();
  if (value == "logistic") return LinkFunction::logistic();
  throw ConfigError("key '" + key + "': expected identity|logistic, got '" + value + "'");
}

ExperimentKind parse_kind(const std::string& value) {
  if (value == "synthetic1") return ExperimentKind::Synthetic1;
  if (value == "synthetic2") return ExperimentKind::Synthetic2;
  if (value == "knapsack_replay") return ExperimentKind::KnapsackReplay;
  if (value == "imagenet_replay") return ExperimentKind::ImageNetReplay;
  throw ConfigError("unknown experiment kind '" + value + "'");
}

ParamRegime parse_regime(const std::string& value) {
  if (value == "complementary") return ParamRegime::Complementary;
  if (value == "skewed_human") return ParamRegime::SkewedHuman;
  if (value == "uniform_random") return ParamRegime::UniformRandom;
  throw ConfigError("unknown regime '" + value + "'");
}

AlgorithmKind parse_algorithm(const std::string& value) {
  if (value == "linear") return AlgorithmKind::Linear;
  if (value == "neural") return AlgorithmKind::NeuralLinear;
  if (value == "model_only") return AlgorithmKind::ModelOnly;
  if (value == "human_only") return AlgorithmKind::HumanOnly;
  if (value == "arbitrary_human") return AlgorithmKind::ArbitraryHuman;
  if (value == "best_reject") return AlgorithmKind::BestReject;
  if (value == "opt") return AlgorithmKind::Opt;
  throw ConfigError("unknown algorithm '" + value + "'");
}

std::vector<FeedbackMode> parse_feedback(const std::string& value) {
  if (value == "full") return {FeedbackMode::FullInformation};
  if (value == "bandit") return {FeedbackMode::PureBandit};
  if (value == "both") return {FeedbackMode::FullInformation, FeedbackMode::PureBandit};
  throw ConfigError("key 'feedback': expected full|bandit|both, got '" + value + "'");
}

struct RawSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;
};

// Kind-sensitive defaults are resolved after all keys of a section are read.
ExperimentConfig build_experiment(const RawSection& section,
                                  const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.name = section.name;
  cfg.out_dir = std::filesystem::path("runs") / section.name;

  bool kind_set = false;
  bool kappa_set = false;
  bool lr_set = false;
  bool schedule_set = false;
  bool reward_link_set = false;
  bool cost_link_set = false;
  bool regime_set = false;
  LinkFunction reward_link = LinkFunction::identity();
  LinkFunction cost_link = LinkFunction::identity();
  TrainSchedule schedule{};
  schedule.update_every = 0;  // sentinel: pick the kind default

  for (const auto& [key, value] : section.entries) {
    if (key == "kind") {
      cfg.kind = parse_kind(value);
      kind_set = true;
    } else if (key == "t") {
      cfg.horizon = parse_int(key, value);
    } else if (key == "d") {
      cfg.dim = static_cast<int>(parse_int(key, value));
    } else if (key == "budgets") {
      cfg.budgets.clear();
      for (const std::string& token : split_list(value)) cfg.budgets.push_back(parse_budget(token));
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(parse_int(key, value));
    } else if (key == "feedback") {
      cfg.feedback_modes = parse_feedback(value);
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const std::string& token : split_list(value)) cfg.algorithms.push_back(parse_algorithm(token));
    } else if (key == "regime") {
      cfg.regime = parse_regime(value);
      regime_set = true;
    } else if (key == "noise_sigma") {
      cfg.noise_sigma = parse_real(key, value);
    } else if (key == "sigma") {
      cfg.confidence.sigma = parse_real(key, value);
    } else if (key == "kappa") {
      cfg.confidence.kappa = parse_real(key, value);
      kappa_set = true;
    } else if (key == "delta") {
      cfg.confidence.delta = parse_real(key, value);
    } else if (key == "ridge") {
      cfg.ridge = parse_real(key, value);
    } else if (key == "reward_link") {
      reward_link = parse_link(key, value);
      reward_link_set = true;
    } else if (key == "cost_link") {
      cost_link = parse_link(key, value);
      cost_link_set = true;
    } else if (key == "replay_csv") {
      std::filesystem::path p(value);
      cfg.replay_csv = p.is_absolute() ? p : base_dir / p;
    } else if (key == "init_rounds_cap") {
      cfg.init_rounds_cap = parse_int(key, value);
    } else if (key == "budget_guard") {
      cfg.budget_guard = parse_real(key, value);
    } else if (key == "per_arm_time_index") {
      cfg.per_arm_time_index = parse_bool(key, value);
    } else if (key == "exclude_warmup") {
      cfg.exclude_warmup = parse_bool(key, value);
    } else if (key == "max_ones") {
      cfg.max_ones = static_cast<int>(parse_int(key, value));
    } else if (key == "lambda") {
      cfg.lambda = parse_real(key, value);
    } else if (key == "hidden_dim") {
      cfg.hidden_dim = static_cast<int>(parse_int(key, value));
    } else if (key == "update_every") {
      schedule.update_every = parse_int(key, value);
      schedule_set = true;
    } else if (key == "late_update_every") {
      schedule.late_update_every = parse_int(key, value);
      schedule_set = true;
    } else if (key == "switch_round") {
      schedule.switch_round = parse_int(key, value);
      schedule_set = true;
    } else if (key == "batch_size") {
      schedule.batch_size = static_cast<int>(parse_int(key, value));
      schedule_set = true;
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_real(key, value);
      lr_set = true;
    } else if (key == "recompute_embeddings") {
      cfg.recompute_embeddings = parse_bool(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_uint(key, value);
    } else if (key == "out") {
      cfg.out_dir = std::filesystem::path(value);
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(parse_int(key, value));
    } else {
      throw ConfigError("experiment '" + section.name + "': unknown key '" + key + "'");
    }
  }

  if (!kind_set) throw ConfigError("experiment '" + section.name + "': missing key 'kind'");

  // Per-kind defaults.
  switch (cfg.kind) {
    case ExperimentKind::Synthetic1:
      if (cfg.horizon == 0) cfg.horizon = 50000;
      if (regime_set && cfg.regime != ParamRegime::UniformRandom) {
        throw ConfigError("experiment '" + section.name +
                          "': synthetic1 always uses the uniform_random regime");
      }
      cfg.regime = ParamRegime::UniformRandom;
      break;
    case ExperimentKind::Synthetic2:
      if (cfg.horizon == 0) cfg.horizon = 50000;
      break;
    case ExperimentKind::KnapsackReplay:
      if (!lr_set) cfg.learning_rate = 0.0005;
      if (!schedule_set) schedule = TrainSchedule{10, 0, 0, 500};
      break;
    case ExperimentKind::ImageNetReplay:
      if (!lr_set) cfg.learning_rate = 0.0001;
      if (!schedule_set) schedule = TrainSchedule{20, 100, 4000, 500};
      if (!reward_link_set) reward_link = LinkFunction::logistic();
      break;
  }
  if (schedule.update_every == 0) schedule.update_every = cfg.is_replay() ? 10 : 100;
  cfg.schedule = schedule;

  cfg.links.reward_model = reward_link;
  cfg.links.reward_human = reward_link;
  cfg.links.cost = cost_link_set ? cost_link : LinkFunction::identity();

  if (!kappa_set) {
    const bool any_logistic = cfg.links.reward_model.kind() == LinkKind::Logistic ||
                              cfg.links.cost.kind() == LinkKind::Logistic;
    cfg.confidence.kappa = any_logistic ? 0.1 : 1.0;
  }
  return cfg;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Synthetic1: return "synthetic1";
    case ExperimentKind::Synthetic2: return "synthetic2";
    case ExperimentKind::KnapsackReplay: return "knapsack_replay";
    case ExperimentKind::ImageNetReplay: return "imagenet_replay";
  }
  return "unknown";
}

std::string to_string(AlgorithmKind algo) {
  switch (algo) {
    case AlgorithmKind::Linear: return "linear";
    case AlgorithmKind::NeuralLinear: return "neural";
    case AlgorithmKind::ModelOnly: return "model_only";
    case AlgorithmKind::HumanOnly: return "human_only";
    case AlgorithmKind::ArbitraryHuman: return "arbitrary_human";
    case AlgorithmKind::BestReject: return "best_reject";
    case AlgorithmKind::Opt: return "opt";
  }
  return "unknown";
}

std::string to_string(FeedbackMode mode) {
  return mode == FeedbackMode::FullInformation ? "full" : "bandit";
}

std::string to_string(ParamRegime regime) {
  switch (regime) {
    case ParamRegime::Complementary: return "complementary";
    case ParamRegime::SkewedHuman: return "skewed_human";
    case ParamRegime::UniformRandom: return "uniform_random";
  }
  return "unknown";
}

BudgetSpec parse_budget(const std::string& token) {
  BudgetSpec spec;
  spec.label = token;
  std::string body = token;
  if (!body.empty() && (body.back() == 'T' || body.back() == 't')) {
    spec.fraction_of_horizon = true;
    body.pop_back();
  }
  spec.value = parse_real("budgets", body);
  if (!(spec.value > 0.0)) throw ConfigError("budgets must be > 0, got '" + token + "'");
  if (spec.fraction_of_horizon && spec.value > 1.0) {
    throw ConfigError("fractional budget must be <= 1T, got '" + token + "'");
  }
  return spec;
}

int ExperimentConfig::effective_trials() const {
  if (trials > 0) return trials;
  return kind == ExperimentKind::Synthetic1 ? 100 : 20;
}

ReplaySchema ExperimentConfig::replay_schema() const {
  return kind == ExperimentKind::ImageNetReplay ? ReplaySchema::ImageNet16H
                                                : ReplaySchema::KnapsackHuman;
}

bool ExperimentConfig::is_replay() const {
  return kind == ExperimentKind::KnapsackReplay || kind == ExperimentKind::ImageNetReplay;
}

void ExperimentConfig::validate() const {
  if (budgets.empty()) throw ConfigError("experiment '" + name + "': missing key 'budgets'");
  if (effective_trials() < 1) throw ConfigError("experiment '" + name + "': trials must be >= 1");
  if (algorithms.empty()) throw ConfigError("experiment '" + name + "': empty algorithm set");
  if (feedback_modes.empty()) throw ConfigError("experiment '" + name + "': empty feedback set");
  if (!is_replay()) {
    if (horizon < 2) throw ConfigError("experiment '" + name + "': T must be >= 2");
    if (dim < 1) throw ConfigError("experiment '" + name + "': d must be >= 1");
    for (const BudgetSpec& b : budgets) {
      if (b.resolve(horizon) > static_cast<double>(horizon)) {
        throw ConfigError("experiment '" + name + "': budget '" + b.label + "' exceeds T");
      }
    }
    if (!(noise_sigma >= 0.0)) throw ConfigError("experiment '" + name + "': noise_sigma must be >= 0");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("experiment '" + name + "': lambda must lie in (0,1)");
    if (max_ones < 1) throw ConfigError("experiment '" + name + "': max_ones must be >= 1");
  } else {
    if (replay_csv.empty()) throw ConfigError("experiment '" + name + "': missing key 'replay_csv'");
    if (!std::filesystem::exists(replay_csv)) {
      throw ConfigError("experiment '" + name + "': replay file not found: " + replay_csv.string());
    }
    if (horizon < 0) throw ConfigError("experiment '" + name + "': T must be >= 0");
  }
  if (!(ridge > 0.0)) throw ConfigError("experiment '" + name + "': ridge must be > 0");
  try {
    confidence.validate();
  } catch (const DomainError& e) {
    throw ConfigError("experiment '" + name + "': " + std::string(e.what()));
  }
  if (hidden_dim < 1) throw ConfigError("experiment '" + name + "': hidden_dim must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("experiment '" + name + "': learning_rate must be >= 0");
  schedule.validate();
  if (jobs < 0) throw ConfigError("experiment '" + name + "': jobs must be >= 0");
}

std::vector<ExperimentConfig> parse_config_text(const std::string& text,
                                                const std::filesystem::path& base_dir) {
  std::vector<RawSection> sections;
  std::vector<std::pair<std::string, std::string>> defaults;
  RawSection* current = nullptr;

  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header at line " + std::to_string(line_no));
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError("empty section name at line " + std::to_string(line_no));
      sections.push_back(RawSection{name, defaults});
      current = &sections.back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected `key = value` at line " + std::to_string(line_no));
    }
    std::string key = trim(line.substr(0, eq));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("empty key or value at line " + std::to_string(line_no));
    }
    if (current) {
      current->entries.emplace_back(key, value);
    } else {
      defaults.emplace_back(key, value);
    }
  }

  if (sections.empty()) sections.push_back(RawSection{"experiment", defaults});

  std::vector<ExperimentConfig> configs;
  configs.reserve(sections.size());
  for (const RawSection& section : sections) {
    ExperimentConfig cfg = build_experiment(section, base_dir);
    cfg.validate();
    configs.push_back(std::move(cfg));
  }
  return configs;
}

std::vector<ExperimentConfig> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.has_parent_path() ? path.parent_path()
                                                                : std::filesystem::path("."));
}

}  // namespace defer
