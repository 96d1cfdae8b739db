#include "defer/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "defer/errors.hpp"
#include "defer/rng.hpp"

namespace defer {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& token, std::size_t line) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw ParseError("cannot parse number '" + token + "'", line);
  }
  if (consumed != token.size()) throw ParseError("trailing characters in number '" + token + "'", line);
  if (!std::isfinite(value)) throw ParseError("non-finite value '" + token + "'", line);
  return value;
}

}  // namespace

std::vector<ReplayRow> load_replay(const std::filesystem::path& path, ReplaySchema schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open replay file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw EmptyDatasetError("replay file is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header.front() != "participant_id" ||
      header[header.size() - 3] != "r_human" || header[header.size() - 2] != "r_model" ||
      header.back() != "cost") {
    throw ParseError("replay header must be participant_id,f0..f{d-1},r_human,r_model,cost", 1);
  }
  const int dim = static_cast<int>(header.size()) - 4;
  if (dim < 1) throw ParseError("replay header declares no feature columns", 1);
  for (int i = 0; i < dim; ++i) {
    if (header[static_cast<std::size_t>(i + 1)] != "f" + std::to_string(i)) {
      throw ParseError("feature columns must be named f0..f" + std::to_string(dim - 1), 1);
    }
  }

  std::vector<ReplayRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    ReplayRow row;
    row.participant_id = fields[0];
    row.features = Eigen::VectorXd(dim);
    for (int i = 0; i < dim; ++i) {
      row.features[i] = parse_double(fields[static_cast<std::size_t>(i + 1)], line_no);
    }
    row.reward_human = parse_double(fields[fields.size() - 3], line_no);
    row.reward_model = parse_double(fields[fields.size() - 2], line_no);
    row.cost = parse_double(fields.back(), line_no);
    if (row.cost < 0.0) throw ParseError("cost must be >= 0", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyDatasetError("replay file has no data rows: " + path.string());

  if (schema == ReplaySchema::ImageNet16H) {
    double total = 0.0;
    for (const ReplayRow& r : rows) total += r.cost;
    const double mean = total / static_cast<double>(rows.size());
    if (!(mean > 0.0)) {
      throw DomainError("ImageNet16H cost normalization needs a positive mean cost");
    }
    for (ReplayRow& r : rows) r.cost /= mean;
  }
  return rows;
}

std::vector<ReplayRow> reorder_participants(const std::vector<ReplayRow>& rows,
                                            std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [begin, end)
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i + 1;
    while (j < rows.size() && rows[j].participant_id == rows[i].participant_id) ++j;
    blocks.emplace_back(i, j);
    i = j;
  }
  std::mt19937_64 rng = make_rng(seed);
  std::shuffle(blocks.begin(), blocks.end(), rng);

  std::vector<ReplayRow> out;
  out.reserve(rows.size());
  for (const auto& [begin, end] : blocks) {
    for (std::size_t i = begin; i < end; ++i) out.push_back(rows[i]);
  }
  return out;
}

void save_replay(const std::filesystem::path& path, const std::vector<ReplayRow>& rows) {
  if (rows.empty()) throw DomainError("save_replay requires at least one row");
  const auto dim = rows.front().features.size();
  std::ofstream out(path);
  if (!out) throw Error("cannot open replay file for writing: " + path.string());

  out << "participant_id";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",f" << i;
  out << ",r_human,r_model,cost\n";

  char buf[32];
  const auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (const ReplayRow& r : rows) {
    if (r.features.size() != dim) throw DomainError("save_replay rows have mixed dimensions");
    out << r.participant_id;
    for (Eigen::Index i = 0; i < dim; ++i) emit(r.features[i]);
    emit(r.reward_human);
    emit(r.reward_model);
    emit(r.cost);
    out << '\n';
  }
}

}  // namespace defer
