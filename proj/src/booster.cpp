#include "archboost/booster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "archboost/kernels.hpp"

namespace archboost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kahan_sum(std::span<const double> v) {
  double sum = 0.0, c = 0.0;
  for (const double x : v) {
    const double t = x - c;
    const double s = sum + t;
    c = (s - sum) - t;
    sum = s;
  }
  return sum;
}

// Golden-section minimization of the summed risk on [a, b].
double golden_min(const Loss& loss, std::span<const double> f,
                  std::span<const double> h, std::span<const double> y, double a,
                  double b, double tol) {
  constexpr double inv_phi = 0.61803398874989484820;
  const auto risk = [&](double alpha) {
    return loss.risk_sum(y.data(), f.data(), h.data(), alpha, y.size());
  };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = risk(x1);
  double f2 = risk(x2);
  while (b - a > tol) {
    if (f1 > f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = risk(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = risk(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<int> TrainTrace::misclass_counts() const {
  if (misclass.empty())
    throw std::runtime_error("trace: misclassification indicators were not retained");
  std::vector<int> counts(n, 0);
  for (std::size_t t = 0; t < rounds(); ++t)
    for (std::size_t i = 0; i < n; ++i) counts[i] += misclass[t * n + i];
  return counts;
}

double Ensemble::score(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t t = 0; t < trees.size(); ++t) s += alphas[t] * trees[t].value(x);
  return s;
}

double default_constant_alpha(std::string_view loss_id) {
  if (loss_id == "arb:1.5") return 0.78;
  if (loss_id == "arb:2") return 0.45;
  if (loss_id == "arb:3") return 0.28;
  if (loss_id == "arb:4") return 0.20;
  if (loss_id == "arb:5") return 0.14;
  if (loss_id == "arb:6") return 0.10;
  if (loss_id == "exp") return 0.80;
  return 0.5;
}

LineSearchResult line_search(std::span<const double> f, std::span<const double> h,
                             std::span<const double> y, const Loss& loss,
                             double alpha_max) {
  if (f.size() != h.size() || f.size() != y.size())
    throw std::invalid_argument("line_search: length mismatch");
  bool any_nonzero = false;
  for (const double v : h)
    if (v != 0.0) any_nonzero = true;
  if (!any_nonzero) throw std::invalid_argument("line_search: h is identically zero");

  const std::size_t n = y.size();
  const auto risk = [&](double alpha) {
    return loss.risk_sum(y.data(), f.data(), h.data(), alpha, n);
  };

  constexpr int grid_points = 64;
  const double risk0 = loss.risk_sum(y.data(), f.data(), nullptr, 0.0, n);
  double best_alpha = 0.0;
  double best_risk = risk0;
  for (int k = 1; k < grid_points; ++k) {
    const double alpha = alpha_max * k / (grid_points - 1);
    const double r = risk(alpha);
    if (r < best_risk) {
      best_risk = r;
      best_alpha = alpha;
    }
  }

  const double step = alpha_max / (grid_points - 1);
  const double lo = std::max(0.0, best_alpha - step);
  const double hi = std::min(alpha_max, best_alpha + step);
  const double refined = golden_min(loss, f, h, y, lo, hi, 1e-9 * alpha_max);
  const double refined_risk = risk(refined);
  if (refined_risk < best_risk) {
    best_risk = refined_risk;
    best_alpha = refined;
  }

  LineSearchResult out;
  if (best_risk < risk0) {
    out.alpha = best_alpha;
    out.risk = best_risk / static_cast<double>(n);
    out.improved = true;
    out.interior = best_alpha > 1e-12 && best_alpha < alpha_max * (1.0 - 1e-12);
  } else {
    out.alpha = 0.0;
    out.risk = risk0 / static_cast<double>(n);
    out.improved = false;
  }
  return out;
}

Ensemble train(const Dataset& data, const BoostConfig& cfg) {
  data.validate();
  const std::size_t n = data.n;
  if (n < 2) throw std::invalid_argument("train: need at least 2 samples");
  if (cfg.t_max < 1) throw std::invalid_argument("train: t_max must be >= 1");
  if (cfg.stopping == StoppingRule::consistency &&
      !(cfg.consistency_epsilon > 0.0 && cfg.consistency_epsilon < 1.0))
    throw std::invalid_argument("train: consistency epsilon must lie in (0,1)");
  if (cfg.stopping == StoppingRule::validation && cfg.validation == nullptr)
    throw std::invalid_argument("train: validation stopping needs a validation set");

  const LossPtr loss = make_loss(cfg.loss_id);
  const bool needs_region_f =
      loss->hypothesis_uses_f() || !loss->has_closed_form_hypothesis();

  int t_final = cfg.t_max;
  if (cfg.stopping == StoppingRule::consistency) {
    const double tn =
        std::ceil(std::pow(static_cast<double>(n), 1.0 - cfg.consistency_epsilon));
    t_final = std::min<int>(cfg.t_max, std::max(1, static_cast<int>(tn)));
  }

  Ensemble ens;
  ens.loss_id = cfg.loss_id;
  ens.loss = loss;
  ens.dim = data.d;
  ens.trace.n = n;

  std::vector<double> w(n, 1.0);
  std::vector<double> f(n, 0.0);
  std::vector<double> h(n, 0.0);
  std::vector<double> logw(n, 0.0);
  std::vector<double> f_val;
  if (cfg.stopping == StoppingRule::validation) {
    cfg.validation->validate();
    f_val.assign(cfg.validation->n, 0.0);
  }
  double best_val_err = kInf;
  int best_val_t = 0;

  const double constant_alpha =
      cfg.constant_alpha ? *cfg.constant_alpha : default_constant_alpha(cfg.loss_id);
  if (cfg.step_mode == StepMode::constant && !(constant_alpha > 0.0))
    throw std::invalid_argument("train: constant step must be positive");

  for (int t = 1; t <= t_final; ++t) {
    // (a) normalize
    double max_w = 0.0;
    for (const double v : w) max_w = std::max(max_w, v);
    if (max_w < 1e-300) {
      ens.trace.weight_collapse = true;
      break;
    }
    const double sum_w = kahan_sum(w);
    for (double& v : w) v /= sum_w;

    // (b) weighted fit
    RegionTree tree = fit_tree(data, w, cfg.tree);
    std::vector<int> leaf_of(n);
    for (std::size_t i = 0; i < n; ++i) leaf_of[i] = tree.leaf_index(data.row(i));

    // (c) hypothesis values per region
    if (needs_region_f) {
      std::vector<double> fbar(tree.leaves.size(), 0.0);
      std::vector<double> wsum(tree.leaves.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        fbar[leaf_of[i]] += w[i] * f[i];
        wsum[leaf_of[i]] += w[i];
      }
      for (std::size_t j = 0; j < fbar.size(); ++j)
        fbar[j] = wsum[j] > 0.0 ? fbar[j] / wsum[j] : 0.0;
      to_weak_hypothesis(tree, *loss, fbar);
    } else {
      to_weak_hypothesis(tree, *loss);
    }
    for (std::size_t i = 0; i < n; ++i) h[i] = tree.leaves[leaf_of[i]].h_value;

    IterationRecord rec;
    rec.margin = empirical_margin(h, data.y, w);

    // (d) step size
    double alpha = 0.0;
    bool interior = false;
    if (cfg.step_mode == StepMode::line_search) {
      const LineSearchResult ls = line_search(f, h, data.y, *loss, cfg.alpha_max);
      alpha = ls.alpha;
      rec.risk = ls.risk;
      rec.line_search_fallback = !ls.improved;
      interior = ls.interior;
    } else if (cfg.step_mode == StepMode::constant) {
      alpha = constant_alpha;
    } else {
      alpha = cfg.schedule_alpha0 *
              std::pow(static_cast<double>(t), -cfg.schedule_exponent);
    }

    // (e) additive update
    for (std::size_t i = 0; i < n; ++i) f[i] = f[i] + alpha * h[i];
    if (cfg.step_mode != StepMode::line_search) {
      rec.risk = loss->risk_sum(data.y.data(), f.data(), nullptr, 0.0, n) /
                 static_cast<double>(n);
    }

    // (f) hardness reweighting, in log space against the running maximum
    loss->log_weights(data.y.data(), f.data(), logw.data(), n);
    double max_lw = -kInf;
    for (const double v : logw) max_lw = std::max(max_lw, v);
    bool collapsed = false;
    if (max_lw == -kInf) {
      collapsed = true;
      std::fill(w.begin(), w.end(), 0.0);
    } else {
      for (std::size_t i = 0; i < n; ++i) w[i] = logw[i] - max_lw;
      kernels::active_ops().exp_inplace(w.data(), n);
    }

    if (interior && !collapsed) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        num += w[i] * data.y[i] * alpha * h[i];
        den += w[i] * std::fabs(h[i]) * alpha;
      }
      rec.hardness_interior = true;
      rec.hardness_residual = std::fabs(num);
      rec.hardness_scale = den;
    }

    {
      const double s = kahan_sum(w);
      double entropy = 0.0;
      if (s > 0.0) {
        for (const double v : w) {
          if (v > 0.0) {
            const double p = v / s;
            entropy -= p * std::log(p);
          }
        }
      }
      rec.weight_entropy = entropy;
    }
    rec.alpha = alpha;

    ens.alphas.push_back(alpha);
    ens.trees.push_back(std::move(tree));
    ens.trace.iterations.push_back(rec);
    if (cfg.retain_misclass) {
      const std::size_t base = ens.trace.misclass.size();
      ens.trace.misclass.resize(base + n);
      for (std::size_t i = 0; i < n; ++i) {
        const int pred = f[i] >= 0.0 ? 1 : -1;
        ens.trace.misclass[base + i] = pred != static_cast<int>(data.y[i]);
      }
    }

    if (cfg.stopping == StoppingRule::validation) {
      const Dataset& val = *cfg.validation;
      const RegionTree& tr = ens.trees.back();
      std::size_t errors = 0;
      for (std::size_t i = 0; i < val.n; ++i) {
        f_val[i] += alpha * tr.value(val.row(i));
        const int pred = f_val[i] >= 0.0 ? 1 : -1;
        errors += pred != static_cast<int>(val.y[i]);
      }
      const double err = static_cast<double>(errors) / static_cast<double>(val.n);
      const int cur = static_cast<int>(ens.trees.size());
      if (err < best_val_err) {
        best_val_err = err;
        best_val_t = cur;
      } else if (cur - best_val_t >= cfg.patience) {
        break;
      }
    }

    if (collapsed) {
      ens.trace.weight_collapse = true;
      break;
    }
  }

  if (cfg.stopping == StoppingRule::validation && best_val_t > 0 &&
      best_val_t < static_cast<int>(ens.trees.size())) {
    ens.trees.resize(best_val_t);
    ens.alphas.resize(best_val_t);
    ens.trace.iterations.resize(best_val_t);
    if (cfg.retain_misclass) ens.trace.misclass.resize(best_val_t * n);
    std::fill(f.begin(), f.end(), 0.0);
    for (std::size_t t = 0; t < ens.trees.size(); ++t)
      for (std::size_t i = 0; i < n; ++i)
        f[i] += ens.alphas[t] * ens.trees[t].leaves[ens.trees[t].leaf_index(data.row(i))].h_value;
  }

  // final normalized weights
  {
    const double s = kahan_sum(w);
    if (s > 0.0)
      for (double& v : w) v /= s;
  }
  ens.final_scores = std::move(f);
  ens.final_weights = std::move(w);
  return ens;
}

Prediction predict(const Ensemble& ensemble, std::span<const double> x) {
  if (ensemble.trees.empty()) throw std::invalid_argument("predict: empty ensemble");
  if (x.size() != ensemble.dim)
    throw std::invalid_argument("predict: feature dimension mismatch");
  Prediction p;
  p.score = ensemble.score(x);
  p.label = p.score >= 0.0 ? 1 : -1;
  return p;
}

double empirical_risk(std::span<const double> scores, std::span<const double> labels,
                      const Loss& loss) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("empirical_risk: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    acc += loss.phi(labels[i] * scores[i]);
  return acc / static_cast<double>(scores.size());
}

double empirical_margin(std::span<const double> h_values, std::span<const double> labels,
                        std::span<const double> weights) {
  if (h_values.size() != labels.size() || h_values.size() != weights.size())
    throw std::invalid_argument("empirical_margin: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < h_values.size(); ++i)
    acc += weights[i] * labels[i] * h_values[i];
  return acc;
}

}  // namespace archboost
