#include "defer/knapsack.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "defer/errors.hpp"
#include "defer/rng.hpp"

namespace defer {

namespace {

std::vector<std::int64_t> parse_int_list(const std::string& text, std::size_t line_no) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    std::size_t consumed = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(token, &consumed);
    } catch (const std::exception&) {
      throw ParseError("cannot parse integer '" + token + "'", line_no);
    }
    while (consumed < token.size() && std::isspace(static_cast<unsigned char>(token[consumed]))) {
      ++consumed;
    }
    if (consumed != token.size()) {
      throw ParseError("trailing characters in integer '" + token + "'", line_no);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

KnapsackInstance gen_knapsack_instance(std::uint64_t seed, int item_count) {
  if (item_count < 1) throw DomainError("gen_knapsack_instance requires item_count >= 1");
  std::mt19937_64 rng = make_rng(seed);
  std::uniform_int_distribution<std::int64_t> unit(1, 100);

  KnapsackInstance inst;
  inst.weights.resize(static_cast<std::size_t>(item_count));
  inst.values.resize(static_cast<std::size_t>(item_count));
  std::int64_t total_weight = 0;
  for (int i = 0; i < item_count; ++i) {
    inst.weights[static_cast<std::size_t>(i)] = unit(rng);
    total_weight += inst.weights[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < item_count; ++i) inst.values[static_cast<std::size_t>(i)] = unit(rng);
  inst.capacity = static_cast<std::int64_t>(std::llround(0.5 * static_cast<double>(total_weight)));
  return inst;
}

std::vector<KnapsackInstance> load_knapsack_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open knapsack instance file: " + path.string());

  std::vector<KnapsackInstance> instances;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, ';')) parts.push_back(part);
    if (parts.size() != 3) {
      throw ParseError("expected `capacity; w1,...,wM; v1,...,vM`", line_no);
    }

    KnapsackInstance inst;
    const std::vector<std::int64_t> cap = parse_int_list(parts[0], line_no);
    if (cap.size() != 1) throw ParseError("capacity must be a single integer", line_no);
    inst.capacity = cap[0];
    inst.weights = parse_int_list(parts[1], line_no);
    inst.values = parse_int_list(parts[2], line_no);
    if (inst.weights.empty() || inst.weights.size() != inst.values.size()) {
      throw ParseError("weights and values must be non-empty and equal length", line_no);
    }
    for (std::int64_t w : inst.weights) {
      if (w < 1) throw ParseError("weights must be >= 1", line_no);
    }
    for (std::int64_t v : inst.values) {
      if (v < 1) throw ParseError("values must be >= 1", line_no);
    }
    if (inst.capacity < 0) throw ParseError("capacity must be >= 0", line_no);
    instances.push_back(std::move(inst));
  }
  if (instances.empty()) throw EmptyDatasetError("knapsack instance file has no instances");
  return instances;
}

void save_knapsack_instances(const std::filesystem::path& path,
                             const std::vector<KnapsackInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open knapsack instance file for writing: " + path.string());
  for (const KnapsackInstance& inst : instances) {
    out << inst.capacity << "; ";
    for (std::size_t i = 0; i < inst.weights.size(); ++i) {
      if (i) out << ',';
      out << inst.weights[i];
    }
    out << "; ";
    for (std::size_t i = 0; i < inst.values.size(); ++i) {
      if (i) out << ',';
      out << inst.values[i];
    }
    out << '\n';
  }
}

}  // namespace defer
