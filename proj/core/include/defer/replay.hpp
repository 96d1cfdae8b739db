#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace defer {

// One logged decision opportunity: features, both arms' realized rewards,
// and the deferral cost. Rows are consumed in file order.
struct ReplayRow {
  std::string participant_id;
  Eigen::VectorXd features;
  double reward_human = 0.0;
  double reward_model = 0.0;
  double cost = 0.0;
};

enum class ReplaySchema { KnapsackHuman, ImageNet16H };

// Loads a replay CSV: header `participant_id,f0,...,f{d-1},r_human,r_model,cost`,
// UTF-8, '.' decimal point, one row per decision opportunity. Under the
// ImageNet16H schema the cost column is rescaled so the dataset mean cost is 1.
//
// Throws ParseError (with the line number) on malformed rows and
// EmptyDatasetError when the file holds no data rows.
std::vector<ReplayRow> load_replay(const std::filesystem::path& path, ReplaySchema schema);

// Writes rows in the same CSV layout load_replay reads.
void save_replay(const std::filesystem::path& path, const std::vector<ReplayRow>& rows);

// Shuffles whole participant blocks (grouped by first appearance), keeping
// the within-participant row order; how replay trials are reordered.
std::vector<ReplayRow> reorder_participants(const std::vector<ReplayRow>& rows,
                                            std::uint64_t seed);

}  // namespace defer
