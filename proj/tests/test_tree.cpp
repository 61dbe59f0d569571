#include <doctest.h>

#include <cmath>
#include <vector>

#include "archboost/booster.hpp"
#include "archboost/loss.hpp"
#include "archboost/rng.hpp"
#include "archboost/tree.hpp"
#include "helpers.hpp"

using namespace archboost;
using archboost::testing::random_dataset;
using archboost::testing::random_weights;

namespace {

Dataset dataset_1d(std::vector<double> x, std::vector<double> y) {
  Dataset d;
  d.n = x.size();
  d.d = 1;
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

}  // namespace

TEST_CASE("separable 1-d data splits once into pure leaves") {
  const Dataset data = dataset_1d({-2.0, -1.0, 1.0, 2.0}, {-1.0, -1.0, 1.0, 1.0});
  const std::vector<double> w(4, 0.25);
  const RegionTree tree = fit_tree(data, w, {});
  REQUIRE(tree.nodes.size() == 1);
  REQUIRE(tree.leaves.size() == 2);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.0));
  CHECK(tree.leaves[0].p == doctest::Approx(0.0));
  CHECK(tree.leaves[1].p == doctest::Approx(1.0));
}

TEST_CASE("single-class data produces a depth-0 tree") {
  const Dataset data = dataset_1d({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0});
  const std::vector<double> w(3, 1.0 / 3.0);
  const RegionTree tree = fit_tree(data, w, {});
  CHECK(tree.nodes.empty());
  REQUIRE(tree.leaves.size() == 1);
  CHECK(tree.leaves[0].p == doctest::Approx(1.0));
  CHECK(tree.leaves[0].total_weight == doctest::Approx(1.0));
}

TEST_CASE("weighted toy split: enumerated weighted Gini picks the middle threshold") {
  // thresholds 0.5 / 1.5 / 2.5 give weighted Gini 1/6, 0 and 1/6; the zero
  // split separates the labels exactly
  const Dataset data = dataset_1d({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, -1.0, -1.0});
  const std::vector<double> w = {0.4, 0.1, 0.1, 0.4};
  TreeConfig cfg;
  cfg.max_depth = 1;
  const RegionTree tree = fit_tree(data, w, cfg);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].threshold == doctest::Approx(1.5));
  CHECK(tree.leaves[0].p == doctest::Approx(1.0));
  CHECK(tree.leaves[1].p == doctest::Approx(0.0));
  CHECK(tree.leaves[0].total_weight == doctest::Approx(0.5));
}

TEST_CASE("clamped probabilities") {
  const Dataset data = dataset_1d({-1.0, 1.0}, {-1.0, 1.0});
  const std::vector<double> w = {0.5, 0.5};
  const RegionTree tree = fit_tree(data, w, {});
  for (const auto& leaf : tree.leaves) {
    CHECK(leaf.clamped_p == doctest::Approx(0.5 + 0.9999 * (leaf.p - 0.5)));
    CHECK(leaf.clamped_p > 0.0);
    CHECK(leaf.clamped_p < 1.0);
  }
}

TEST_CASE("fitting is deterministic") {
  Rng rng(55);
  const Dataset data = random_dataset(rng, 80, 4);
  const auto w = random_weights(rng, 80);
  const RegionTree a = fit_tree(data, w, {});
  const RegionTree b = fit_tree(data, w, {});
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
  }
  REQUIRE(a.leaves.size() == b.leaves.size());
  for (std::size_t i = 0; i < a.leaves.size(); ++i) {
    CHECK(a.leaves[i].p == b.leaves[i].p);
    CHECK(a.leaves[i].total_weight == b.leaves[i].total_weight);
  }
}

namespace {

int tree_depth(const RegionTree& tree, int node = 0) {
  if (tree.nodes.empty()) return 0;
  const SplitNode& n = tree.nodes[node];
  const int l = n.left >= 0 ? tree_depth(tree, n.left) : 0;
  const int r = n.right >= 0 ? tree_depth(tree, n.right) : 0;
  return 1 + std::max(l, r);
}

}  // namespace

TEST_CASE("every point routes to exactly one valid leaf") {
  Rng rng(56);
  const Dataset data = random_dataset(rng, 200, 3);
  const auto w = random_weights(rng, 200);
  TreeConfig cfg;
  cfg.max_depth = 4;
  const RegionTree tree = fit_tree(data, w, cfg);
  CHECK(tree.leaves.size() >= 2);
  for (int k = 0; k < 10000; ++k) {
    double pt[3] = {6.0 * rng.uniform() - 3.0, 6.0 * rng.uniform() - 3.0,
                    6.0 * rng.uniform() - 3.0};
    const int leaf = tree.leaf_index({pt, 3});
    CHECK(leaf >= 0);
    CHECK(leaf < static_cast<int>(tree.leaves.size()));
  }
}

TEST_CASE("depth cap and leaf-weight floor are honored") {
  Rng rng(58);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 20 + rng.below(150);
    const Dataset data = random_dataset(rng, n, 2);
    const auto w = random_weights(rng, n);
    TreeConfig cfg;
    cfg.max_depth = static_cast<int>(1 + rng.below(4));
    cfg.min_leaf_weight = 0.05;
    const RegionTree tree = fit_tree(data, w, cfg);
    CHECK(tree_depth(tree) <= cfg.max_depth);
    for (const auto& leaf : tree.leaves)
      CHECK(leaf.total_weight >= cfg.min_leaf_weight - 1e-12);
  }
}

TEST_CASE("points on the threshold go right") {
  const Dataset data = dataset_1d({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, -1.0, -1.0});
  const std::vector<double> w(4, 0.25);
  TreeConfig cfg;
  cfg.max_depth = 1;
  RegionTree tree = fit_tree(data, w, cfg);
  const double thr = tree.nodes[0].threshold;
  const double on[1] = {thr};
  const double below[1] = {std::nextafter(thr, -10.0)};
  CHECK(tree.leaf_index({on, 1}) == ~tree.nodes[0].right);
  CHECK(tree.leaf_index({below, 1}) == ~tree.nodes[0].left);
}

TEST_CASE("fit preconditions") {
  Dataset empty;
  empty.d = 1;
  CHECK_THROWS_AS((void)fit_tree(empty, {}, {}), std::invalid_argument);

  const Dataset one = dataset_1d({0.5}, {1.0});
  const std::vector<double> w1 = {1.0};
  CHECK_THROWS_AS((void)fit_tree(one, w1, {}), std::invalid_argument);

  const Dataset data = dataset_1d({0.0, 1.0}, {1.0, -1.0});
  const std::vector<double> zeros = {0.0, 0.0};
  CHECK_THROWS_AS((void)fit_tree(data, zeros, {}), std::invalid_argument);
  const std::vector<double> unnorm = {0.7, 0.7};
  CHECK_THROWS_AS((void)fit_tree(data, unnorm, {}), std::invalid_argument);
  const std::vector<double> negative = {1.5, -0.5};
  CHECK_THROWS_AS((void)fit_tree(data, negative, {}), std::invalid_argument);
}

TEST_CASE("hypothesis values from the loss rules") {
  RegionTree tree;
  tree.leaves.push_back({0, 0.5, 0.5, 0.0, 1.0});
  const auto arb2 = make_loss("arb:2");
  to_weak_hypothesis(tree, *arb2);
  CHECK(tree.leaves[0].h_value == doctest::Approx(0.0).epsilon(1e-15));

  tree.leaves[0].clamped_p = 0.73105857863000488;  // sigma(1)
  to_weak_hypothesis(tree, *arb2);
  CHECK(tree.leaves[0].h_value == doctest::Approx(1.0).epsilon(1e-9));

  // square loss needs the per-region score
  const auto ls = make_loss("ls");
  tree.leaves[0].clamped_p = 0.75;
  const std::vector<double> region_f = {0.0};
  to_weak_hypothesis(tree, *ls, region_f);
  CHECK(tree.leaves[0].h_value == doctest::Approx(0.5));
  CHECK_THROWS_AS(to_weak_hypothesis(tree, *ls), std::invalid_argument);
}

TEST_CASE("depth-0 prediction returns the single leaf value") {
  RegionTree tree;
  tree.leaves.push_back({0, 0.6, 0.6, 0.3, 1.0});
  const double x[2] = {123.0, -5.0};
  CHECK(predict_region_value(tree, {x, 2}) == doctest::Approx(0.3));
}

TEST_CASE("toy tree routes by the split") {
  const Dataset data = dataset_1d({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, -1.0, -1.0});
  const std::vector<double> w = {0.4, 0.1, 0.1, 0.4};
  TreeConfig cfg;
  cfg.max_depth = 1;
  RegionTree tree = fit_tree(data, w, cfg);
  to_weak_hypothesis(tree, *make_loss("arb:2"));
  const double probe[1] = {0.5};
  CHECK(predict_region_value(tree, {probe, 1}) ==
        doctest::Approx(tree.leaves[~tree.nodes[0].left].h_value));
  CHECK(predict_region_value(tree, {probe, 1}) > 0.0);  // left leaf is the positive one
}

TEST_CASE("fitted-and-converted trees have positive weighted margin") {
  Rng rng(57);
  const auto loss = make_loss("arb:2");
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 5 + rng.below(56);
    const std::size_t d = 1 + rng.below(3);
    const Dataset data = random_dataset(rng, n, d);
    const auto w = random_weights(rng, n);
    TreeConfig cfg;
    cfg.max_depth = static_cast<int>(1 + rng.below(3));
    RegionTree tree = fit_tree(data, w, cfg);
    to_weak_hypothesis(tree, *loss);

    bool informative = false;
    for (const auto& leaf : tree.leaves)
      if (leaf.clamped_p != 0.5) informative = true;
    if (!informative) continue;

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = tree.value(data.row(i));
    const double margin = empirical_margin(h, data.y, w);
    CAPTURE(trial);
    CHECK(margin > 0.0);

    // theta and 2p-1 share a sign on every region
    for (const auto& leaf : tree.leaves) {
      const double t = loss->theta(leaf.clamped_p);
      CHECK(t * (2.0 * leaf.p - 1.0) >= 0.0);
    }
    ++checked;
  }
  CHECK(checked >= 450);
}
