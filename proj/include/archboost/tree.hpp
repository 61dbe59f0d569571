#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "archboost/dataset.hpp"
#include "archboost/loss.hpp"

namespace archboost {

struct TreeConfig {
  int max_depth = 3;
  double min_leaf_weight = 1e-3;
  // Leaf probabilities are mapped to a_c*p + (1-a_c)/2 before the hypothesis
  // rule, keeping log-odds finite.
  double clamp = 0.9999;
};

// A fitted region with its weighted class probability and hypothesis value.
struct Region {
  int id = 0;
  double p = 0.5;          // weighted P(Y=1 | region) at fit time
  double clamped_p = 0.5;  // a_c * p + (1 - a_c) / 2
  double h_value = 0.0;    // filled by to_weak_hypothesis
  double total_weight = 0.0;
};

// Axis-aligned split; child >= 0 indexes nodes, child < 0 encodes leaf ~child.
// Points with x[feature] >= threshold go right.
struct SplitNode {
  int feature = 0;
  double threshold = 0.0;
  int left = 0;
  int right = 0;
};

// Disjoint-region partition of feature space with per-region values. The
// leaves always cover the space: every point routes to exactly one leaf.
struct RegionTree {
  std::vector<SplitNode> nodes;  // empty for a depth-0 tree
  std::vector<Region> leaves;    // at least one

  int leaf_index(std::span<const double> x) const;
  const Region& leaf(std::span<const double> x) const { return leaves[leaf_index(x)]; }
  double value(std::span<const double> x) const { return leaf(x).h_value; }
};

// Greedy top-down weighted-Gini fit. Weights must be nonnegative and sum to 1
// (1e-9 tolerance); n >= 2. Deterministic: ties broken by lowest feature
// index, then lowest threshold.
RegionTree fit_tree(const Dataset& data, std::span<const double> weights,
                    const TreeConfig& config);

// Fills h_value on every leaf from the loss rule applied to the clamped
// probability (and the per-region current score where the loss needs it).
// region_f must have one entry per leaf when the loss uses the current score
// or lacks a closed form; it may be empty otherwise.
void to_weak_hypothesis(RegionTree& tree, const Loss& loss,
                        std::span<const double> region_f = {});

double predict_region_value(const RegionTree& tree, std::span<const double> x);

}  // namespace archboost
