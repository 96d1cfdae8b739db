#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace defer {

struct KnapsackInstance {
  std::vector<std::int64_t> weights;
  std::vector<std::int64_t> values;
  std::int64_t capacity = 0;

  int item_count() const { return static_cast<int>(weights.size()); }
};

// Random integer instance: weights and values uniform in [1, 100], capacity
// rounded from half the total weight. Deterministic under the seed.
KnapsackInstance gen_knapsack_instance(std::uint64_t seed, int item_count = 18);

// Instance file: one instance per line, `capacity; w1,...,wM; v1,...,vM`.
std::vector<KnapsackInstance> load_knapsack_instances(const std::filesystem::path& path);
void save_knapsack_instances(const std::filesystem::path& path,
                             const std::vector<KnapsackInstance>& instances);

}  // namespace defer
