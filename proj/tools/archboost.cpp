// archboost: robust boosting toolkit CLI.
//
// Subcommands: gen, train, predict, run, validate-loss, detect-outliers,
// bench. See README.md for the plan file and model document schemas.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "archboost/booster.hpp"
#include "archboost/dataset.hpp"
#include "archboost/diagnostics.hpp"
#include "archboost/experiments.hpp"
#include "archboost/kernels.hpp"
#include "archboost/loss.hpp"
#include "archboost/probability.hpp"
#include "archboost/serialize.hpp"

namespace {

using namespace archboost;

Dataset generate_by_name(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (name == "hastie") return gen_hastie(n, seed);
  if (name == "gaussian-quantiles" || name == "gaussian_quantiles")
    return gen_gaussian_quantiles(n, seed);
  if (name == "long-servedio" || name == "long_servedio")
    return gen_long_servedio(n, seed);
  throw std::runtime_error("unknown generator '" + name + "'");
}

struct CsvOptions {
  std::string label_column = "label";
  std::vector<std::string> label_map;  // entries like "M=1" / "B=-1"
};

CsvSchema schema_from(const CsvOptions& opt) {
  CsvSchema schema;
  schema.label_column = opt.label_column;
  for (const auto& entry : opt.label_map) {
    const auto pos = entry.find('=');
    if (pos == std::string::npos)
      throw std::runtime_error("label map entries look like NAME=1 or NAME=-1");
    schema.label_encoding[entry.substr(0, pos)] = std::stoi(entry.substr(pos + 1));
  }
  return schema;
}

int cmd_gen(const std::string& generator, std::size_t n, std::uint64_t seed,
            const std::string& out, const std::string& cont_kind, double eps,
            double t_df, std::uint64_t cont_seed) {
  Dataset data = generate_by_name(generator, n, seed);
  DatasetManifest manifest{generator, seed, data.n, data.d, std::nullopt};
  if (!cont_kind.empty() && eps > 0.0) {
    ContaminationSpec spec;
    spec.kind = cont_kind == "feature_t_noise" ? ContaminationKind::feature_t_noise
                                               : ContaminationKind::label_flip;
    spec.epsilon = eps;
    spec.t_df = t_df;
    spec.seed = cont_seed;
    data = contaminate(data, spec);
    manifest.contamination = spec;
  }
  save_csv(data, out);
  write_manifest(manifest, out);
  std::cout << "wrote " << data.n << "x" << data.d << " dataset to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, const CsvOptions& csv,
              const std::string& loss_id, int iters, const std::string& step,
              std::optional<double> alpha, double eps_consistency,
              const std::string& stopping, int max_depth, const std::string& out,
              bool standardize) {
  Dataset data = load_csv(data_path, schema_from(csv));
  if (standardize) fit_standardizer(data).apply(data);
  BoostConfig cfg;
  cfg.loss_id = loss_id;
  cfg.t_max = iters;
  cfg.tree.max_depth = max_depth;
  if (step == "constant") {
    cfg.step_mode = StepMode::constant;
    if (alpha) cfg.constant_alpha = *alpha;
  } else if (step == "schedule") {
    cfg.step_mode = StepMode::schedule;
  } else {
    cfg.step_mode = StepMode::line_search;
  }
  if (stopping == "consistency") {
    cfg.stopping = StoppingRule::consistency;
    cfg.consistency_epsilon = eps_consistency;
  }
  const Ensemble ens = train(data, cfg);
  save_ensemble(ens, out);
  const auto& last = ens.trace.iterations.back();
  std::cout << "trained " << ens.trees.size() << " rounds, final risk " << last.risk
            << ", model written to " << out << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const CsvOptions& csv, const std::string& prob_mode,
                const std::string& out) {
  const Ensemble ens = load_ensemble(model_path);
  const Dataset data = load_csv(data_path, schema_from(csv));
  ProbabilityEstimator est{prob_mode == "inverse_link" ? ProbMode::inverse_link
                                                       : ProbMode::product_formula,
                           &ens};
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write '" + out + "'");
  os << "index,score,label,probability\n";
  char buf[128];
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const Prediction p = predict(ens, data.row(i));
    const double prob = estimate_probability(est, data.row(i));
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%d,%.17g\n", i, p.score, p.label, prob);
    os << buf;
    correct += p.label == static_cast<int>(data.y[i]);
  }
  std::cout << "accuracy " << static_cast<double>(correct) / data.n << " over "
            << data.n << " rows, predictions written to " << out << "\n";
  return 0;
}

int cmd_run(const std::string& plan_path, const std::string& out_dir,
            std::optional<int> reps, std::optional<int> iters,
            std::optional<std::uint64_t> seed) {
  ExperimentPlan plan = load_plan(plan_path);
  if (reps) plan.replications = *reps;
  if (iters) plan.iterations = *iters;
  if (seed) plan.seed = *seed;
  std::filesystem::create_directories(out_dir);
  const ResultTable table = run_plan(plan);
  emit_results_csv(table, out_dir + "/results.csv");
  emit_results_json(table, out_dir + "/results.json");
  emit_plot_csv(table, out_dir + "/plot.csv");
  for (const auto& row : table.rows) {
    std::printf("%-12s eps=%.3f %-6s mean=%.4f std=%.4f reps=%d\n", row.method.c_str(),
                row.eps, row.variant.c_str(), row.mean_error, row.std_error,
                row.replications);
  }
  if (!table.failure_log.empty()) {
    std::cerr << table.failure_log.size() << " cell(s) failed:\n";
    for (const auto& f : table.failure_log) std::cerr << "  " << f << "\n";
  }
  std::cout << "results written to " << out_dir << "\n";
  return table.failure_log.empty() ? 0 : 1;
}

int cmd_validate_loss(const std::string& loss_id) {
  const LossPtr loss = make_loss(loss_id);
  const ValidationReport report = validate_arch_loss(*loss);
  nlohmann::json j;
  j["loss"] = loss->name();
  j["pass"] = report.pass;
  nlohmann::json conditions = nlohmann::json::array();
  for (const auto& c : report.conditions)
    conditions.push_back({{"name", c.name},
                          {"applicable", c.applicable},
                          {"pass", c.pass},
                          {"witness_v", c.witness_v},
                          {"witness_alpha", c.witness_alpha},
                          {"detail", c.detail}});
  j["conditions"] = std::move(conditions);
  std::cout << j.dump(2) << "\n";
  return report.pass ? 0 : 2;
}

int cmd_detect_outliers(const std::string& data_path, const CsvOptions& csv,
                        const std::string& loss_id, int iters,
                        std::optional<double> alpha, double threshold,
                        const std::string& out) {
  const Dataset data = load_csv(data_path, schema_from(csv));
  BoostConfig cfg;
  cfg.loss_id = loss_id;
  cfg.t_max = iters;
  cfg.step_mode = StepMode::constant;
  if (alpha) cfg.constant_alpha = *alpha;
  cfg.retain_misclass = true;
  const Ensemble ens = train(data, cfg);
  const OutlierScore score = outlier_detect(ens.trace, threshold);
  if (!out.empty()) write_outlier_csv(score, out);
  std::cout << score.flagged.size() << " of " << data.n
            << " samples misclassified more than " << score.cutoff << " times over "
            << ens.trace.rounds() << " rounds\n";
  if (!out.empty()) std::cout << "scores written to " << out << "\n";
  return 0;
}

int cmd_bench_long_servedio(double eps, int reps, std::size_t n, int iters) {
  const ExperimentPlan plan = long_servedio_plan(eps, reps, n, iters);
  const ResultTable table = run_plan(plan);
  for (const auto& row : table.rows) {
    std::printf("%-8s eps=%.2f %-6s mean=%.4f%% std=%.4f%% reps=%d\n",
                row.method.c_str(), row.eps, row.variant.c_str(),
                100.0 * row.mean_error, 100.0 * row.std_error, row.replications);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"archboost: robust boosting with the gamma-robust loss family"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_name = "hastie", gen_out = "data.csv", gen_cont;
  std::size_t gen_n = 2000;
  std::uint64_t gen_seed = 1, gen_cont_seed = 2;
  double gen_eps = 0.0, gen_tdf = 4.0;
  gen->add_option("--generator", gen_name, "hastie | gaussian-quantiles | long-servedio");
  gen->add_option("--n", gen_n, "sample count")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();
  gen->add_option("--contaminate", gen_cont, "label_flip | feature_t_noise");
  gen->add_option("--eps", gen_eps, "contamination fraction");
  gen->add_option("--t-df", gen_tdf, "t-noise degrees of freedom");
  gen->add_option("--cont-seed", gen_cont_seed, "contamination seed");

  // shared CSV options
  CsvOptions csv;

  // train
  auto* tr = app.add_subcommand("train", "train an ensemble on a CSV dataset");
  std::string tr_data, tr_loss = "arb:2", tr_step = "line_search",
              tr_stopping = "fixed", tr_out = "model.json";
  int tr_iters = 200, tr_depth = 3;
  double tr_alpha = -1.0, tr_ceps = 0.5;
  bool tr_std = false;
  tr->add_option("--data", tr_data)->required();
  tr->add_option("--loss", tr_loss, "arb:<g> | exp | logit | ls | mls | trunc_exp:<t0>");
  tr->add_option("--iters", tr_iters);
  tr->add_option("--step", tr_step, "line_search | constant | schedule");
  tr->add_option("--alpha", tr_alpha, "constant step size");
  tr->add_option("--stopping", tr_stopping, "fixed | consistency");
  tr->add_option("--consistency-eps", tr_ceps);
  tr->add_option("--max-depth", tr_depth);
  tr->add_option("--out", tr_out);
  tr->add_flag("--standardize", tr_std, "standardize features (fit on this data)");
  tr->add_option("--label-col", csv.label_column);
  tr->add_option("--label-map", csv.label_map, "e.g. --label-map M=1 B=-1");

  // predict
  auto* pr = app.add_subcommand("predict", "score a CSV dataset with a model");
  std::string pr_model, pr_data, pr_mode = "product", pr_out = "predictions.csv";
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--data", pr_data)->required();
  pr->add_option("--prob-mode", pr_mode, "product | inverse_link");
  pr->add_option("--out", pr_out);
  pr->add_option("--label-col", csv.label_column);
  pr->add_option("--label-map", csv.label_map);

  // run
  auto* run = app.add_subcommand("run", "run an experiment plan");
  std::string run_plan_path, run_out = "results";
  int run_reps = -1, run_iters = -1;
  std::int64_t run_seed = -1;
  run->add_option("--plan", run_plan_path)->required();
  run->add_option("--out", run_out);
  run->add_option("--reps", run_reps, "override plan replications");
  run->add_option("--iters", run_iters, "override plan iterations");
  run->add_option("--seed", run_seed, "override plan seed");

  // validate-loss
  auto* vl = app.add_subcommand("validate-loss", "check the Arch boosting loss conditions");
  std::string vl_loss;
  vl->add_option("--loss", vl_loss)->required();

  // detect-outliers
  auto* det = app.add_subcommand("detect-outliers",
                                 "flag repeatedly misclassified training samples");
  std::string det_data, det_loss = "arb:2", det_out = "outliers.csv";
  int det_iters = 800;
  double det_alpha = -1.0, det_threshold = 0.75;
  det->add_option("--data", det_data)->required();
  det->add_option("--loss", det_loss);
  det->add_option("--iters", det_iters);
  det->add_option("--alpha", det_alpha, "constant step size");
  det->add_option("--threshold", det_threshold, "flag counts above threshold*iters");
  det->add_option("--out", det_out);
  det->add_option("--label-col", csv.label_column);
  det->add_option("--label-map", csv.label_map);

  // bench
  auto* bench = app.add_subcommand("bench", "built-in benchmark studies");
  auto* ls = bench->add_subcommand("long-servedio", "noisy-label mixture study");
  double ls_eps = 0.1;
  int ls_reps = 20, ls_iters = 200;
  std::size_t ls_n = 800;
  ls->add_option("--eps", ls_eps, "label flip fraction");
  ls->add_option("--reps", ls_reps);
  ls->add_option("--n", ls_n);
  ls->add_option("--iters", ls_iters);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(gen_name, gen_n, gen_seed, gen_out, gen_cont, gen_eps, gen_tdf,
                     gen_cont_seed);
    if (tr->parsed())
      return cmd_train(tr_data, csv, tr_loss, tr_iters, tr_step,
                       tr_alpha > 0 ? std::optional<double>(tr_alpha) : std::nullopt,
                       tr_ceps, tr_stopping, tr_depth, tr_out, tr_std);
    if (pr->parsed()) return cmd_predict(pr_model, pr_data, csv, pr_mode, pr_out);
    if (run->parsed())
      return cmd_run(run_plan_path, run_out,
                     run_reps > 0 ? std::optional<int>(run_reps) : std::nullopt,
                     run_iters > 0 ? std::optional<int>(run_iters) : std::nullopt,
                     run_seed >= 0 ? std::optional<std::uint64_t>(run_seed)
                                   : std::nullopt);
    if (vl->parsed()) return cmd_validate_loss(vl_loss);
    if (det->parsed())
      return cmd_detect_outliers(det_data, csv, det_loss, det_iters,
                                 det_alpha > 0 ? std::optional<double>(det_alpha)
                                               : std::nullopt,
                                 det_threshold, det_out);
    if (bench->parsed() && ls->parsed())
      return cmd_bench_long_servedio(ls_eps, ls_reps, ls_n, ls_iters);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "no subcommand given\n";
  return 1;
}
