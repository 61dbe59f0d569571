#include <doctest.h>

#include <cmath>
#include <vector>

#include "archboost/booster.hpp"
#include "archboost/dataset.hpp"
#include "archboost/diagnostics.hpp"
#include "archboost/loss.hpp"
#include "archboost/rng.hpp"

using namespace archboost;

namespace {

// A chain tree over one feature: J regions split by sorted thresholds.
RegionTree chain_tree(const std::vector<double>& thresholds) {
  RegionTree tree;
  const int j = static_cast<int>(thresholds.size()) + 1;
  for (int k = 0; k < j; ++k) tree.leaves.push_back({k, 0.5, 0.5, 0.0, 0.0});
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const int next = k + 1 < thresholds.size() ? static_cast<int>(k + 1) : ~(j - 1);
    tree.nodes.push_back({0, thresholds[k], ~static_cast<int>(k), next});
  }
  if (thresholds.empty()) tree.nodes.clear();
  return tree;
}

struct BreakdownInstance {
  RegionTree tree;
  Dataset data;
  std::vector<double> weights;
  std::vector<std::uint8_t> mask;
};

// Random multi-region instance whose per-region weight inequality holds with
// a 0.999 margin; rejection-sampled so the property is established by
// construction, independent of the checker.
BreakdownInstance random_breakdown_instance(Rng& rng, const Loss& loss) {
  for (;;) {
    const std::size_t regions = 1 + rng.below(5);
    std::vector<double> thresholds;
    for (std::size_t k = 1; k < regions; ++k)
      thresholds.push_back(static_cast<double>(k));

    BreakdownInstance inst;
    inst.tree = chain_tree(thresholds);
    inst.data.d = 1;

    bool ok = true;
    for (std::size_t r = 0; r < regions && ok; ++r) {
      const std::size_t m = 3 + rng.below(8);
      double w_all = 0.0, w_pos = 0.0, w_out = 0.0, w_in = 0.0;
      std::vector<double> ws(m);
      std::vector<double> ys(m);
      std::vector<std::uint8_t> os(m);
      for (std::size_t i = 0; i < m; ++i) {
        ws[i] = 0.05 + rng.uniform();
        ys[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
        os[i] = rng.uniform() < 0.3 ? 1 : 0;
        w_all += ws[i];
        if (ys[i] > 0) w_pos += ws[i];
        (os[i] ? w_out : w_in) += ws[i];
      }
      const double p = w_pos / w_all;
      if (p != 0.5 && p > 0.0 && p < 1.0) {
        const double eta = std::fabs(p - 0.5) / std::min(p, 1.0 - p);
        if (!(w_out <= 0.999 * eta * w_in)) {
          ok = false;
          break;
        }
      } else if (p == 0.0 || p == 1.0) {
        if (w_in == 0.0 && w_out > 0.0) {
          ok = false;
          break;
        }
      }
      const double cp = 0.5 + 0.9999 * (p - 0.5);
      inst.tree.leaves[r].p = p;
      inst.tree.leaves[r].clamped_p = cp;
      inst.tree.leaves[r].h_value = loss.theta(cp);
      for (std::size_t i = 0; i < m; ++i) {
        inst.data.x.push_back(static_cast<double>(r) + 0.5);
        inst.data.y.push_back(ys[i]);
        inst.weights.push_back(ws[i]);
        inst.mask.push_back(os[i]);
        inst.data.n++;
      }
    }
    if (ok) return inst;
  }
}

}  // namespace

TEST_CASE("breakdown: empty outlier set reduces to the empirical margin") {
  Rng rng(81);
  Dataset data;
  data.n = 30;
  data.d = 1;
  data.x.resize(30);
  data.y.resize(30);
  std::vector<double> w(30);
  double sum = 0.0;
  for (int i = 0; i < 30; ++i) {
    data.x[i] = rng.uniform() * 3.0;
    data.y[i] = rng.uniform() < 0.6 ? 1.0 : -1.0;
    w[i] = 0.1 + rng.uniform();
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  RegionTree tree = fit_tree(data, w, {});
  to_weak_hypothesis(tree, *make_loss("arb:2"));
  const std::vector<std::uint8_t> clean(30, 0);
  const BreakdownReport report = check_breakdown(tree, data, w, clean);
  CHECK(report.condition_all);
  CHECK(report.direction_preserved);
  std::vector<double> h(30);
  for (int i = 0; i < 30; ++i) h[i] = tree.value(data.row(i));
  CHECK(report.inner_product == doctest::Approx(empirical_margin(h, data.y, w)));
  CHECK(report.inner_product >= 0.0);
}

TEST_CASE("breakdown: the worked single-region ratio") {
  // p = 0.75 gives eta = 0.25/0.25 = 1; outliers carry 0.3 against 0.7
  RegionTree tree = chain_tree({});
  tree.leaves[0].p = 0.75;
  tree.leaves[0].clamped_p = 0.75;
  tree.leaves[0].h_value = make_loss("arb:2")->theta(0.75);

  Dataset data;
  data.n = 4;
  data.d = 1;
  data.x = {0.0, 0.0, 0.0, 0.0};
  data.y = {1.0, 1.0, 1.0, -1.0};
  const std::vector<double> w = {0.45, 0.3, 0.0, 0.25};
  // arrange p: pos weight 0.75 of total 1.0; outlier = the 0.3 sample
  const std::vector<std::uint8_t> mask = {0, 1, 0, 0};
  const BreakdownReport report = check_breakdown(tree, data, w, mask);
  REQUIRE(report.regions.size() == 1);
  CHECK(report.regions[0].p == doctest::Approx(0.75));
  CHECK(report.regions[0].eta == doctest::Approx(1.0));
  CHECK(report.regions[0].outlier_weight == doctest::Approx(0.3));
  CHECK(report.regions[0].inlier_weight == doctest::Approx(0.7));
  CHECK(report.regions[0].condition_holds);
  CHECK(report.direction_preserved);
}

TEST_CASE("breakdown soundness over randomized instances") {
  Rng rng(82);
  const auto loss = make_loss("arb:2");
  for (int trial = 0; trial < 200; ++trial) {
    const BreakdownInstance inst = random_breakdown_instance(rng, *loss);
    const BreakdownReport report =
        check_breakdown(inst.tree, inst.data, inst.weights, inst.mask);
    CAPTURE(trial);
    CHECK(report.condition_all);
    CHECK(report.inner_product >= 0.0);
  }
}

TEST_CASE("influence bound closed forms") {
  const auto arb2 = make_loss("arb:2");
  CHECK(influence_bound(*arb2, 1.0, 1.0, 0.0) == doctest::Approx(1.5).epsilon(1e-12));
  // redescending tail: the derivative term vanishes
  CHECK(std::fabs(influence_bound(*arb2, 1.0, 1.0, -40.0) - 1.0) <= 1e-10);

  const auto exp_loss = make_loss("exp");
  CHECK(influence_bound(*exp_loss, 1.0, 1.0, -10.0) ==
        doctest::Approx(1.0 + 0.5 * std::exp(10.0)).epsilon(1e-12));

  CHECK_THROWS_AS((void)influence_bound(*arb2, 0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)influence_bound(*arb2, 1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("influence bound is non-increasing past the weight peak") {
  const auto arb2 = make_loss("arb:2");
  double prev = influence_bound(*arb2, 0.7, 2.0, -1.0);
  for (double m = -2.0; m >= -12.0; m -= 1.0) {
    const double b = influence_bound(*arb2, 0.7, 2.0, m);
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
}

TEST_CASE("invex transform identity") {
  const std::vector<double> f0 = {0.0};
  const std::vector<double> y0 = {1.0};
  CHECK(invex_transform_check(f0, y0) <= 1e-16);

  // F = 5, y = 1: A = log(1+e^5), e^{-A} = 1/(1+e^5)
  const std::vector<double> f5 = {5.0};
  CHECK(invex_transform_check(f5, y0) <= 1e-12);
  const double a = std::log1p(std::exp(5.0));
  CHECK(a == doctest::Approx(5.006715348489118).epsilon(1e-12));

  Rng rng(83);
  std::vector<double> f(100), y(100);
  for (int i = 0; i < 100; ++i) {
    f[i] = 60.0 * rng.uniform() - 30.0;
    y[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
  }
  CHECK(invex_transform_check(f, y) <= 1e-12);
}

TEST_CASE("outlier detection arithmetic") {
  TrainTrace trace;
  trace.n = 4;
  const int rounds = 800;
  trace.iterations.resize(rounds);
  trace.misclass.assign(static_cast<std::size_t>(rounds) * 4, 0);
  // counts: 601, 600, 700, 0
  for (int t = 0; t < rounds; ++t) {
    if (t < 601) trace.misclass[t * 4 + 0] = 1;
    if (t < 600) trace.misclass[t * 4 + 1] = 1;
    if (t < 700) trace.misclass[t * 4 + 2] = 1;
  }
  const OutlierScore score = outlier_detect(trace, 0.75);
  CHECK(score.cutoff == doctest::Approx(600.0));
  REQUIRE(score.flagged.size() == 2);  // strictly above 600
  CHECK(score.flagged[0] == 0);
  CHECK(score.flagged[1] == 2);

  const std::vector<std::uint8_t> mask = {1, 1, 0, 0};
  const OutlierScore with_mask = outlier_detect(trace, 0.75, mask);
  CHECK(with_mask.has_ratio);
  CHECK(with_mask.flagged_outliers == 1);
  CHECK(with_mask.recovery_ratio == doctest::Approx(0.5));

  TrainTrace empty;
  empty.n = 4;
  CHECK_THROWS_AS((void)outlier_detect(empty, 0.75), std::runtime_error);
}

TEST_CASE("clean separable training flags nothing") {
  Dataset data;
  data.n = 60;
  data.d = 1;
  data.x.resize(60);
  data.y.resize(60);
  for (int i = 0; i < 60; ++i) {
    data.x[i] = i < 30 ? -1.0 - 0.01 * i : 1.0 + 0.01 * i;
    data.y[i] = i < 30 ? -1.0 : 1.0;
  }
  BoostConfig cfg;
  cfg.loss_id = "arb:2";
  cfg.t_max = 50;
  const Ensemble ens = train(data, cfg);
  const OutlierScore score = outlier_detect(ens.trace, 0.75);
  CHECK(score.flagged.empty());
}

TEST_CASE("breakdown report serializes") {
  RegionTree tree = chain_tree({});
  tree.leaves[0].h_value = 0.1;
  Dataset data;
  data.n = 2;
  data.d = 1;
  data.x = {0.0, 0.0};
  data.y = {1.0, -1.0};
  const std::vector<double> w = {0.6, 0.4};
  const std::vector<std::uint8_t> mask = {0, 0};
  const nlohmann::json j = breakdown_to_json(check_breakdown(tree, data, w, mask));
  CHECK(j.contains("regions"));
  CHECK(j.contains("inner_product"));
  CHECK(j["regions"].size() == 1);
}
