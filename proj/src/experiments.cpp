#include "archboost/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "archboost/rng.hpp"

namespace archboost {

namespace {

constexpr const char* kVersion = "archboost 1.0.0";

Dataset generate(const std::string& generator, std::size_t n, std::uint64_t seed) {
  if (generator == "hastie") return gen_hastie(n, seed);
  if (generator == "gaussian_quantiles") return gen_gaussian_quantiles(n, seed);
  if (generator == "long_servedio") return gen_long_servedio(n, seed);
  throw std::invalid_argument("run_plan: unknown generator '" + generator + "'");
}

ContaminationSpec make_spec(const ContaminationPlan& plan, double eps,
                            std::uint64_t seed) {
  ContaminationSpec spec;
  spec.kind = plan.kind == "feature_t_noise" ? ContaminationKind::feature_t_noise
                                             : ContaminationKind::label_flip;
  spec.epsilon = eps;
  spec.t_df = plan.t_df;
  spec.mode = plan.flip_mode == "bernoulli" ? FlipMode::bernoulli : FlipMode::subset;
  spec.seed = seed;
  return spec;
}

Dataset slice(const Dataset& data, std::size_t begin, std::size_t count) {
  Dataset out;
  out.n = count;
  out.d = data.d;
  out.x.assign(data.x.begin() + begin * data.d, data.x.begin() + (begin + count) * data.d);
  out.y.assign(data.y.begin() + begin, data.y.begin() + begin + count);
  if (data.has_mask())
    out.mask.assign(data.mask.begin() + begin, data.mask.begin() + begin + count);
  return out;
}

double misclassification(const Ensemble& ens, const Dataset& data) {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double s = ens.score(data.row(i));
    const int pred = s >= 0.0 ? 1 : -1;
    errors += pred != static_cast<int>(data.y[i]);
  }
  return static_cast<double>(errors) / static_cast<double>(data.n);
}

std::vector<double> cv_candidates(const ExperimentPlan& plan, const MethodSpec& method) {
  std::vector<double> grid = plan.cv_grid;
  if (method.loss_id.rfind("arb:", 0) == 0) {
    const double g = std::stod(method.loss_id.substr(4));
    if (g > 1.0) grid.push_back(0.45 / (g - 1.0));  // rule-of-thumb seed value
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BoostConfig base_config(const ExperimentPlan& plan, const MethodSpec& method) {
  BoostConfig cfg;
  cfg.loss_id = method.loss_id;
  cfg.t_max = plan.iterations;
  cfg.tree = plan.tree;
  cfg.retain_misclass = false;
  if (method.step == "line_search") {
    cfg.step_mode = StepMode::line_search;
  } else {
    cfg.step_mode = StepMode::constant;
    if (method.alpha) cfg.constant_alpha = *method.alpha;
  }
  return cfg;
}

// Trains with CV-selected constant step: candidates are ranked by 0-1 error
// on the holdout, ties resolved toward the smaller step.
Ensemble train_with_cv(const ExperimentPlan& plan, const MethodSpec& method,
                       const Dataset& cv_train, const Dataset& holdout,
                       const Dataset& final_train) {
  BoostConfig cfg = base_config(plan, method);
  if (method.step != "cv") return train(final_train, cfg);
  double best_alpha = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (const double alpha : cv_candidates(plan, method)) {
    cfg.step_mode = StepMode::constant;
    cfg.constant_alpha = alpha;
    const Ensemble candidate = train(cv_train, cfg);
    const double err = misclassification(candidate, holdout);
    if (err < best_err) {
      best_err = err;
      best_alpha = alpha;
    }
  }
  cfg.constant_alpha = best_alpha;
  return train(final_train, cfg);
}

struct CellResult {
  bool failed = false;
  std::string error;
  // variant -> error rate
  std::vector<std::pair<std::string, double>> errors;
};

CellResult run_cell(const ExperimentPlan& plan, const MethodSpec& method, double eps,
                    int rep) {
  CellResult out;
  const std::uint64_t data_seed = Rng::derive(plan.seed, 1000003ULL * rep).next_u64();
  const std::uint64_t cont_seed =
      Rng::derive(plan.seed, 2000003ULL * rep + static_cast<std::uint64_t>(eps * 1e6))
          .next_u64();

  if (plan.effective_protocol() == "train_noisy_test_clean") {
    const Dataset clean = generate(plan.generator, plan.n_train, data_seed);
    Dataset noisy = eps > 0.0
                        ? contaminate(clean, make_spec(plan.contamination, eps, cont_seed))
                        : clean;
    if (plan.n_cv >= plan.n_train)
      throw std::invalid_argument("run_plan: n_cv must be below n_train here");
    const Dataset cv_train = slice(noisy, 0, plan.n_train - plan.n_cv);
    const Dataset cv_hold = slice(noisy, plan.n_train - plan.n_cv, plan.n_cv);
    const Ensemble model = train_with_cv(plan, method, cv_train, cv_hold, noisy);
    out.errors.emplace_back("clean", misclassification(model, clean));
    out.errors.emplace_back("noisy", misclassification(model, noisy));
    return out;
  }

  const std::size_t total = plan.n_train + plan.n_cv + plan.n_test;
  const Dataset all = generate(plan.generator, total, data_seed);
  Dataset train_part = slice(all, 0, plan.n_train);
  Dataset cv_part = slice(all, plan.n_train, plan.n_cv);
  const Dataset test_part = slice(all, plan.n_train + plan.n_cv, plan.n_test);
  if (eps > 0.0 && plan.contamination.kind != "none") {
    train_part = contaminate(train_part, make_spec(plan.contamination, eps, cont_seed));
    cv_part = contaminate(cv_part, make_spec(plan.contamination, eps, cont_seed + 1));
  }
  // The test slice must stay clean: it is carved out before contamination.
  if (test_part.has_mask())
    for (const auto m : test_part.mask)
      if (m) throw std::logic_error("run_plan: contaminated test sample");

  const Ensemble model = train_with_cv(plan, method, train_part, cv_part, train_part);
  out.errors.emplace_back("test", misclassification(model, test_part));
  return out;
}

std::size_t thread_budget(std::size_t cells) {
  std::size_t threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("ARCHBOOST_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) threads = static_cast<std::size_t>(v);
  }
  if (threads == 0) threads = 1;
  return std::min(threads, std::max<std::size_t>(cells, 1));
}

}  // namespace

std::string ExperimentPlan::effective_protocol() const {
  if (!protocol.empty()) return protocol;
  return generator == "long_servedio" ? "train_noisy_test_clean" : "split";
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan p;
  p.generator = j.value("generator", p.generator);
  p.protocol = j.value("protocol", p.protocol);
  p.n_train = j.value("n_train", p.n_train);
  p.n_cv = j.value("n_cv", p.n_cv);
  p.n_test = j.value("n_test", p.n_test);
  if (j.contains("contamination")) {
    const auto& c = j.at("contamination");
    p.contamination.kind = c.value("kind", p.contamination.kind);
    if (c.contains("eps")) p.contamination.eps = c.at("eps").get<std::vector<double>>();
    p.contamination.t_df = c.value("t_df", p.contamination.t_df);
    p.contamination.flip_mode = c.value("flip_mode", p.contamination.flip_mode);
  }
  if (j.contains("methods")) {
    p.methods.clear();
    for (const auto& m : j.at("methods")) {
      MethodSpec spec;
      spec.loss_id = m.at("loss").get<std::string>();
      spec.step = m.value("step", spec.step);
      if (m.contains("alpha")) spec.alpha = m.at("alpha").get<double>();
      p.methods.push_back(std::move(spec));
    }
  }
  p.iterations = j.value("iterations", p.iterations);
  p.replications = j.value("replications", p.replications);
  p.seed = j.value("seed", p.seed);
  if (j.contains("cv_grid")) p.cv_grid = j.at("cv_grid").get<std::vector<double>>();
  if (j.contains("tree")) {
    const auto& t = j.at("tree");
    p.tree.max_depth = t.value("max_depth", p.tree.max_depth);
    p.tree.min_leaf_weight = t.value("min_leaf_weight", p.tree.min_leaf_weight);
  }
  if (p.methods.empty()) throw std::invalid_argument("plan: no methods");
  if (p.replications < 1) throw std::invalid_argument("plan: replications must be >= 1");
  for (const double e : p.contamination.eps)
    if (!(e >= 0.0 && e < 0.5))
      throw std::invalid_argument("plan: eps values must lie in [0, 0.5)");
  return p;
}

nlohmann::json plan_to_json(const ExperimentPlan& p) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : p.methods) {
    nlohmann::json jm = {{"loss", m.loss_id}, {"step", m.step}};
    if (m.alpha) jm["alpha"] = *m.alpha;
    methods.push_back(std::move(jm));
  }
  return {
      {"generator", p.generator},
      {"protocol", p.protocol},
      {"n_train", p.n_train},
      {"n_cv", p.n_cv},
      {"n_test", p.n_test},
      {"contamination",
       {{"kind", p.contamination.kind},
        {"eps", p.contamination.eps},
        {"t_df", p.contamination.t_df},
        {"flip_mode", p.contamination.flip_mode}}},
      {"methods", std::move(methods)},
      {"iterations", p.iterations},
      {"replications", p.replications},
      {"seed", p.seed},
      {"cv_grid", p.cv_grid},
      {"tree",
       {{"max_depth", p.tree.max_depth}, {"min_leaf_weight", p.tree.min_leaf_weight}}},
  };
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("plan: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return plan_from_json(j);
}

std::uint64_t plan_hash(const ExperimentPlan& plan) {
  const std::string canonical = plan_to_json(plan).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ResultTable run_plan(const ExperimentPlan& plan) {
  struct Cell {
    std::size_t method;
    std::size_t eps_idx;
    int rep;
  };
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < plan.methods.size(); ++m)
    for (std::size_t e = 0; e < plan.contamination.eps.size(); ++e)
      for (int r = 0; r < plan.replications; ++r) cells.push_back({m, e, r});

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = thread_budget(cells.size());
  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const Cell& c = cells[k];
      try {
        results[k] = run_cell(plan, plan.methods[c.method],
                              plan.contamination.eps[c.eps_idx], c.rep);
      } catch (const std::exception& e) {
        results[k].failed = true;
        results[k].error = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Aggregate per (method, eps, variant), in deterministic cell order.
  std::map<std::tuple<std::size_t, std::size_t, std::string>, std::vector<double>> groups;
  std::map<std::pair<std::size_t, std::size_t>, int> failures;
  ResultTable table;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Cell& c = cells[k];
    if (results[k].failed) {
      failures[{c.method, c.eps_idx}]++;
      table.failure_log.push_back(plan.methods[c.method].loss_id + " eps=" +
                                  std::to_string(plan.contamination.eps[c.eps_idx]) +
                                  " rep=" + std::to_string(c.rep) + ": " +
                                  results[k].error);
      continue;
    }
    for (const auto& [variant, err] : results[k].errors)
      groups[{c.method, c.eps_idx, variant}].push_back(err);
  }

  for (const auto& [key, errs] : groups) {
    const auto& [m, e, variant] = key;
    ResultRow row;
    row.method = plan.methods[m].loss_id;
    row.eps = plan.contamination.eps[e];
    row.variant = variant;
    row.replications = static_cast<int>(errs.size());
    double mean = 0.0;
    for (const double v : errs) mean += v;
    mean /= static_cast<double>(errs.size());
    double var = 0.0;
    for (const double v : errs) var += (v - mean) * (v - mean);
    var = errs.size() > 1 ? var / static_cast<double>(errs.size() - 1) : 0.0;
    row.mean_error = mean;
    row.std_error = std::sqrt(var);
    row.ci_half = 1.96 * row.std_error / std::sqrt(static_cast<double>(errs.size()));
    const auto fit = failures.find({m, e});
    row.failures = fit == failures.end() ? 0 : fit->second;
    table.rows.push_back(std::move(row));
  }

  table.plan_digest = plan_hash(plan);
  table.seed = plan.seed;
  table.version = kVersion;
  return table;
}

void emit_results_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("results: cannot write '" + path + "'");
  out << "method,eps,variant,mean_error,std_error,replications,ci_half,failures\n";
  char buf[512];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%s,%.17g,%.17g,%d,%.17g,%d\n",
                  r.method.c_str(), r.eps, r.variant.c_str(), r.mean_error,
                  r.std_error, r.replications, r.ci_half, r.failures);
    out << buf;
  }
  if (!out) throw std::runtime_error("results: write failure on '" + path + "'");
}

void emit_results_json(const ResultTable& table, const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"method", r.method},
                    {"eps", r.eps},
                    {"variant", r.variant},
                    {"mean_error", r.mean_error},
                    {"std_error", r.std_error},
                    {"replications", r.replications},
                    {"ci_half", r.ci_half},
                    {"failures", r.failures}});
  nlohmann::json j = {{"metadata",
                       {{"plan_hash", table.plan_digest},
                        {"seed", table.seed},
                        {"version", table.version}}},
                      {"rows", std::move(rows)},
                      {"failures", table.failure_log}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("results: cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("results: write failure on '" + path + "'");
}

void emit_plot_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("plot: cannot write '" + path + "'");
  out << "method,eps,mean,ci_lo,ci_hi\n";
  bool has_test = false;
  for (const auto& r : table.rows)
    if (r.variant == "test") has_test = true;
  char buf[512];
  for (const auto& r : table.rows) {
    if (has_test && r.variant != "test") continue;
    const std::string name = has_test ? r.method : r.method + "/" + r.variant;
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", name.c_str(),
                  r.eps, r.mean_error, r.mean_error - r.ci_half,
                  r.mean_error + r.ci_half);
    out << buf;
  }
  if (!out) throw std::runtime_error("plot: write failure on '" + path + "'");
}

ExperimentPlan long_servedio_plan(double eps, int reps, std::size_t n, int iterations) {
  ExperimentPlan plan;
  plan.generator = "long_servedio";
  plan.n_train = n;
  plan.n_cv = n / 4;
  plan.n_test = 0;
  plan.contamination.kind = "label_flip";
  plan.contamination.eps = {eps};
  plan.methods = {{"arb:2", "cv", {}}, {"exp", "cv", {}}};
  plan.iterations = iterations;
  plan.replications = reps;
  plan.seed = 76001;
  plan.tree.max_depth = 2;
  return plan;
}

}  // namespace archboost
