#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "archboost/booster.hpp"
#include "archboost/dataset.hpp"

namespace archboost {

struct MethodSpec {
  std::string loss_id = "arb:2";
  std::string step = "cv";  // "cv" | "constant" | "line_search"
  std::optional<double> alpha;
};

struct ContaminationPlan {
  std::string kind = "label_flip";  // "label_flip" | "feature_t_noise" | "none"
  std::vector<double> eps = {0.0};
  double t_df = 4.0;
  std::string flip_mode = "subset";  // "subset" | "bernoulli"
};

// One benchmark study: a generator, a contamination grid, methods, and the
// replication/CV protocol. Fully deterministic given the seed; the same
// replication index sees the same dataset under every method.
struct ExperimentPlan {
  std::string generator = "hastie";  // hastie | gaussian_quantiles | long_servedio
  // "split": disjoint train/cv/test slices, train+cv contaminated.
  // "train_noisy_test_clean": the training pool is a contaminated copy of the
  // clean sample, which also serves as the clean test set (the cv holdout is
  // carved out of the noisy pool). Empty selects by generator.
  std::string protocol;
  std::size_t n_train = 2000;
  std::size_t n_cv = 2000;
  std::size_t n_test = 2000;
  ContaminationPlan contamination;
  std::vector<MethodSpec> methods;
  int iterations = 200;
  int replications = 5;
  std::uint64_t seed = 1;
  std::vector<double> cv_grid = {0.05, 0.1, 0.14, 0.2, 0.28, 0.45, 0.5, 0.78, 0.8, 1.0};
  TreeConfig tree;

  std::string effective_protocol() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::string& path);

// FNV-1a over the canonical serialization; changes iff any field changes.
std::uint64_t plan_hash(const ExperimentPlan& plan);

struct ResultRow {
  std::string method;
  double eps = 0.0;
  std::string variant;  // "test" for split plans; "clean"/"noisy" otherwise
  double mean_error = 0.0;
  double std_error = 0.0;  // sample standard deviation over replications
  int replications = 0;    // successful replications
  double ci_half = 0.0;    // 1.96 * std / sqrt(replications)
  int failures = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::uint64_t plan_digest = 0;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> failure_log;
};

// Runs every (method, eps, replication) cell; cells run in parallel up to
// ARCHBOOST_THREADS. Training failures are flagged per cell and excluded from
// the aggregates.
ResultTable run_plan(const ExperimentPlan& plan);

void emit_results_csv(const ResultTable& table, const std::string& path);
void emit_results_json(const ResultTable& table, const std::string& path);
void emit_plot_csv(const ResultTable& table, const std::string& path);

// The Long/Servedio study with noisy training and clean evaluation.
ExperimentPlan long_servedio_plan(double eps, int reps, std::size_t n = 800,
                                  int iterations = 200);

}  // namespace archboost
