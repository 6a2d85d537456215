#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "agc/detector.h"
#include "agc/rng.h"

namespace agc::internal {

// Row ids sorted ascending by each feature (stable on ties).
using Presorted = std::vector<std::vector<std::uint32_t>>;
Presorted presort(const TrainingData& data);

// Per-row statistic vector. A node's score is sum_k s_k^2 / w over its
// rows' summed components s_k and weight w; the gain of a split is
// score(left) + score(right) - score(parent). With one component holding
// weighted residuals this is variance reduction; with two components holding
// weighted class indicators it is the decrease in weighted Gini impurity.
struct RowStats {
  double w = 0.0;
  std::array<double, 2> s{};
};

struct GrowOptions {
  int components = 1;
  int max_depth = 0;  // 0 = unlimited
  double min_samples_leaf = 1.0;
  int max_features = 0;  // 0 = all; otherwise a random subset per node
  bool stop_when_pure = false;  // two-component only
};

struct GrownTree {
  Tree tree;
  std::vector<RowStats> node_stats;  // indexed like tree.nodes
};

// Grows one tree level by level over the rows with positive weight.
// rng is used only when options.max_features selects a feature subset.
GrownTree grow_tree(const TrainingData& data, const Presorted& order,
                    std::span<const RowStats> rows, const GrowOptions& options,
                    RngStream* rng);

}  // namespace agc::internal
