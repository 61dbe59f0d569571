#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "archboost/dataset.hpp"
#include "archboost/loss.hpp"
#include "archboost/tree.hpp"

namespace archboost {

enum class StepMode { line_search, constant, schedule };
enum class StoppingRule { fixed, consistency, validation };

struct BoostConfig {
  std::string loss_id = "arb:2";
  int t_max = 200;

  StepMode step_mode = StepMode::line_search;
  // Constant step; when unset, per-loss cross-validated defaults apply
  // (0.78 arb:1.5, 0.45 arb:2, 0.28 arb:3, 0.20 arb:4, 0.14 arb:5,
  //  0.10 arb:6, 0.80 exp; 0.5 otherwise).
  std::optional<double> constant_alpha;
  double schedule_alpha0 = 1.0;     // alpha_t = alpha0 * t^{-exponent}
  double schedule_exponent = 0.7;   // in (1/2, 1)
  double alpha_max = 4.0;           // line-search domain (0, alpha_max]

  StoppingRule stopping = StoppingRule::fixed;
  double consistency_epsilon = 0.5;     // T = ceil(n^{1-eps}), capped by t_max
  const Dataset* validation = nullptr;  // required for validation stopping
  int patience = 25;

  TreeConfig tree;
  std::uint64_t seed = 0;
  bool retain_misclass = true;
};

struct IterationRecord {
  double risk = 0.0;    // empirical risk after the update
  double margin = 0.0;  // weighted margin of h_t under w_t
  double alpha = 0.0;
  double weight_entropy = 0.0;
  bool line_search_fallback = false;  // no step improved the risk
  bool hardness_interior = false;     // alpha strictly inside (0, alpha_max)
  double hardness_residual = 0.0;     // |sum w' y a h|
  double hardness_scale = 0.0;        // sum w' |h| a
};

struct TrainTrace {
  std::size_t n = 0;
  std::vector<IterationRecord> iterations;
  // Row-major [t * n + i]: 1 when sign(F_t(x_i)) != y_i; empty unless retained.
  std::vector<std::uint8_t> misclass;
  bool weight_collapse = false;

  std::size_t rounds() const { return iterations.size(); }
  // Per-sample misclassification counts over all recorded rounds.
  std::vector<int> misclass_counts() const;
};

struct Ensemble {
  std::string loss_id;
  LossPtr loss;
  std::size_t dim = 0;
  std::vector<double> alphas;
  std::vector<RegionTree> trees;
  std::vector<double> final_scores;   // F_T on the training samples
  std::vector<double> final_weights;  // normalized w_{T+1}
  TrainTrace trace;

  double score(std::span<const double> x) const;
};

struct Prediction {
  double score = 0.0;
  int label = 1;  // sign(score), sign(0) = +1
};

struct LineSearchResult {
  double alpha = 0.0;
  double risk = 0.0;   // empirical risk (mean) at alpha
  bool improved = false;
  bool interior = false;
};

// Approximate argmin over [0, alpha_max] of the mean loss at shifted scores:
// 64-point grid plus golden-section refinement of the best bracket. The
// returned step never increases the risk relative to alpha = 0; when nothing
// improves it falls back to 0 with improved = false.
LineSearchResult line_search(std::span<const double> f, std::span<const double> h,
                             std::span<const double> y, const Loss& loss,
                             double alpha_max);

Ensemble train(const Dataset& data, const BoostConfig& config);

Prediction predict(const Ensemble& ensemble, std::span<const double> x);

// Definitional sums, sequential over the sample index.
double empirical_risk(std::span<const double> scores, std::span<const double> labels,
                      const Loss& loss);
double empirical_margin(std::span<const double> h_values, std::span<const double> labels,
                        std::span<const double> weights);

double default_constant_alpha(std::string_view loss_id);

}  // namespace archboost
