#include "archboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace archboost {

namespace {

struct NodeStats {
  double weight = 0.0;
  double weight_pos = 0.0;
};

double gini_cost(const NodeStats& s) {
  if (s.weight <= 0.0) return 0.0;
  const double p = s.weight_pos / s.weight;
  return 2.0 * p * (1.0 - p) * s.weight;
}

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double cost = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const double> weights,
              const TreeConfig& config)
      : data_(data), w_(weights), cfg_(config) {}

  RegionTree build() {
    std::vector<std::size_t> idx(data_.n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RegionTree tree;
    grow(tree, idx, 0);
    return tree;
  }

 private:
  NodeStats stats_of(const std::vector<std::size_t>& idx) const {
    NodeStats s;
    for (const std::size_t i : idx) {
      s.weight += w_[i];
      if (data_.y[i] > 0) s.weight_pos += w_[i];
    }
    return s;
  }

  BestSplit best_split(const std::vector<std::size_t>& idx, const NodeStats& parent) {
    BestSplit best;
    const double parent_cost = gini_cost(parent);
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < data_.d; ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = data_.x[a * data_.d + f];
        const double xb = data_.x[b * data_.d + f];
        return xa != xb ? xa < xb : a < b;
      });
      NodeStats left;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const std::size_t i = order[k];
        left.weight += w_[i];
        if (data_.y[i] > 0) left.weight_pos += w_[i];
        const double a = data_.x[i * data_.d + f];
        const double b = data_.x[order[k + 1] * data_.d + f];
        if (a == b) continue;
        const double thr = 0.5 * (a + b);
        if (!(a < thr)) continue;  // midpoint collapsed onto a
        const NodeStats right{parent.weight - left.weight,
                              parent.weight_pos - left.weight_pos};
        if (left.weight < cfg_.min_leaf_weight || right.weight < cfg_.min_leaf_weight)
          continue;
        const double cost = gini_cost(left) + gini_cost(right);
        if (cost < parent_cost && (!best.found || cost < best.cost)) {
          best.found = true;
          best.feature = static_cast<int>(f);
          best.threshold = thr;
          best.cost = cost;
        }
      }
    }
    return best;
  }

  int make_leaf(RegionTree& tree, const NodeStats& stats) {
    Region r;
    r.id = static_cast<int>(tree.leaves.size());
    r.p = stats.weight > 0.0 ? stats.weight_pos / stats.weight : 0.5;
    r.clamped_p = 0.5 + cfg_.clamp * (r.p - 0.5);
    r.total_weight = stats.weight;
    tree.leaves.push_back(r);
    return ~r.id;
  }

  int grow(RegionTree& tree, const std::vector<std::size_t>& idx, int depth) {
    const NodeStats stats = stats_of(idx);
    if (depth >= cfg_.max_depth || idx.size() < 2) return make_leaf(tree, stats);
    const BestSplit best = best_split(idx, stats);
    if (!best.found) return make_leaf(tree, stats);

    std::vector<std::size_t> left_idx, right_idx;
    for (const std::size_t i : idx) {
      if (data_.x[i * data_.d + static_cast<std::size_t>(best.feature)] < best.threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({best.feature, best.threshold, 0, 0});
    const int left = grow(tree, left_idx, depth + 1);
    const int right = grow(tree, right_idx, depth + 1);
    tree.nodes[node_id].left = left;
    tree.nodes[node_id].right = right;
    return node_id;
  }

  const Dataset& data_;
  std::span<const double> w_;
  const TreeConfig& cfg_;
};

}  // namespace

int RegionTree::leaf_index(std::span<const double> x) const {
  if (nodes.empty()) return 0;
  int cur = 0;
  for (;;) {
    const SplitNode& n = nodes[cur];
    cur = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    if (cur < 0) return ~cur;
  }
}

RegionTree fit_tree(const Dataset& data, std::span<const double> weights,
                    const TreeConfig& config) {
  if (data.n == 0) throw std::invalid_argument("fit_tree: empty dataset");
  if (data.n < 2) throw std::invalid_argument("fit_tree: need at least 2 samples");
  if (weights.size() != data.n)
    throw std::invalid_argument("fit_tree: weight vector length mismatch");
  double sum = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw std::invalid_argument("fit_tree: negative weight");
    sum += w;
  }
  if (sum == 0.0) throw std::invalid_argument("fit_tree: all weights are zero");
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("fit_tree: weights must be normalized");
  return TreeBuilder(data, weights, config).build();
}

void to_weak_hypothesis(RegionTree& tree, const Loss& loss,
                        std::span<const double> region_f) {
  const bool needs_f = loss.hypothesis_uses_f() || !loss.has_closed_form_hypothesis();
  if (needs_f && region_f.size() != tree.leaves.size())
    throw std::invalid_argument(
        "to_weak_hypothesis: loss requires one current-score entry per region");
  for (auto& leaf : tree.leaves) {
    const double p = leaf.clamped_p;
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("to_weak_hypothesis: clamped probability out of (0,1)");
    const double f = region_f.empty() ? 0.0 : region_f[static_cast<std::size_t>(leaf.id)];
    if (loss.has_closed_form_hypothesis()) {
      leaf.h_value = loss.weak_hypothesis(p, f);
    } else {
      try {
        leaf.h_value = solve_weak_hypothesis(loss, p, f);
      } catch (const std::exception& e) {
        throw std::runtime_error("to_weak_hypothesis: region " +
                                 std::to_string(leaf.id) + ": " + e.what());
      }
    }
  }
}

double predict_region_value(const RegionTree& tree, std::span<const double> x) {
  return tree.value(x);
}

}  // namespace archboost
