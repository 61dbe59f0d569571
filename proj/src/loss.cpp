#include "archboost/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "archboost/kernels.hpp"

namespace archboost {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;
constexpr double kInf = std::numeric_limits<double>::infinity();

double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

class GammaRobustLoss final : public Loss {
 public:
  GammaRobustLoss(double a, double gamma)
      : Loss("arb:" + format_gamma(gamma)), a_(a), gamma_(gamma) {}

  double a() const { return a_; }
  double gamma() const { return gamma_; }

  double phi(double v) const override {
    return std::exp(gamma_ * (kLn2 - softplus(a_ * v)));
  }
  double phi_prime(double v) const override {
    const double u = a_ * v;
    return -a_ * gamma_ *
           std::exp(gamma_ * kLn2 + u - (gamma_ + 1.0) * softplus(u));
  }
  double phi_double_prime(double v) const override {
    // a^2 g 2^g e^u (g e^u - 1) / (1+e^u)^{g+2}, split into two stable terms
    const double u = a_ * v;
    const double sp = softplus(u);
    const double t1 = gamma_ * std::exp(gamma_ * kLn2 + 2.0 * u - (gamma_ + 2.0) * sp);
    const double t2 = std::exp(gamma_ * kLn2 + u - (gamma_ + 2.0) * sp);
    return a_ * a_ * gamma_ * (t1 - t2);
  }
  double weight(double v) const override { return std::exp(log_weight(v)); }
  double log_weight(double v) const override {
    const double u = a_ * v;
    return u - (gamma_ + 1.0) * softplus(u);
  }
  double weight_constant() const override {
    return a_ * gamma_ * std::exp(gamma_ * kLn2);
  }
  double theta(double t, double) const override { return logit(t); }
  double weak_hypothesis(double p, double) const override {
    require_training_grade();
    return logit(p);
  }
  double optimal_f(double p) const override {
    require_training_grade();
    return logit(p) / (a_ * (gamma_ - 1.0));
  }
  double inverse_optimal_f(double f) const override {
    require_training_grade();
    return sigmoid(a_ * (gamma_ - 1.0) * f);
  }

  double risk_sum(const double* y, const double* f, const double* h, double alpha,
                  std::size_t n) const override {
    return kernels::active_ops().risk_sum_gamma(a_, gamma_, y, f, h, alpha, n);
  }
  void log_weights(const double* y, const double* f, double* out,
                   std::size_t n) const override {
    kernels::active_ops().log_weights_gamma(a_, gamma_, y, f, out, n);
  }

 private:
  static std::string format_gamma(double g) {
    std::string s = std::to_string(g);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
  void require_training_grade() const {
    if (gamma_ <= 1.0)
      throw std::domain_error("gamma-robust loss with gamma <= 1 has no stage solution");
  }

  double a_;
  double gamma_;
};

class ExponentialLoss final : public Loss {
 public:
  ExponentialLoss() : Loss("exp") {}

  double phi(double v) const override { return std::exp(-v); }
  double phi_prime(double v) const override { return -std::exp(-v); }
  double phi_double_prime(double v) const override { return std::exp(-v); }
  double weight(double v) const override { return std::exp(-v); }
  double log_weight(double v) const override { return -v; }
  double weight_constant() const override { return 1.0; }
  double theta(double t, double) const override { return logit(t); }
  double weak_hypothesis(double p, double) const override { return 0.5 * logit(p); }
  double optimal_f(double p) const override { return 0.5 * logit(p); }
  double inverse_optimal_f(double f) const override { return sigmoid(2.0 * f); }

  double risk_sum(const double* y, const double* f, const double* h, double alpha,
                  std::size_t n) const override {
    return kernels::active_ops().risk_sum_exp(y, f, h, alpha, n);
  }
  void log_weights(const double* y, const double* f, double* out,
                   std::size_t n) const override {
    kernels::active_ops().log_weights_exp(y, f, out, n);
  }
};

class LogisticLoss final : public Loss {
 public:
  LogisticLoss() : Loss("logit") {}

  double phi(double v) const override { return softplus(-v); }
  double phi_prime(double v) const override { return -sigmoid(-v); }
  double phi_double_prime(double v) const override {
    return sigmoid(v) * sigmoid(-v);
  }
  double weight(double v) const override { return sigmoid(-v); }
  double log_weight(double v) const override { return -softplus(v); }
  double weight_constant() const override { return 1.0; }
  double theta(double t, double) const override { return logit(t); }
  double weak_hypothesis(double p, double) const override { return logit(p); }
  double optimal_f(double p) const override { return logit(p); }
  double inverse_optimal_f(double f) const override { return sigmoid(f); }
};

// Shared base of the two square losses; the weak hypothesis depends on the
// current score: h = C(1-F)(1+F)/(CF+1), C = 2p-1, with F clamped to [-1,1].
class SquareLossBase : public Loss {
 public:
  using Loss::Loss;

  double theta(double t, double f) const override {
    const double c = 2.0 * t - 1.0;
    const double fc = std::clamp(f, -1.0, 1.0);
    return c * (1.0 - fc) * (1.0 + fc) / (c * fc + 1.0);
  }
  bool hypothesis_uses_f() const override { return true; }
  double weak_hypothesis(double p, double f) const override { return theta(p, f); }
  double optimal_f(double p) const override { return 2.0 * p - 1.0; }
  double inverse_optimal_f(double f) const override {
    return std::clamp(0.5 * (1.0 + f), 0.0, 1.0);
  }
};

class LeastSquaresLoss final : public SquareLossBase {
 public:
  LeastSquaresLoss() : SquareLossBase("ls") {}

  double phi(double v) const override { return (v - 1.0) * (v - 1.0); }
  double phi_prime(double v) const override { return 2.0 * (v - 1.0); }
  double phi_double_prime(double) const override { return 2.0; }
  // -phi' goes negative past v = 1; the rule clamps there (matching the
  // modified square loss), so points with margin above 1 drop out.
  double weight(double v) const override { return std::max(1.0 - v, 0.0); }
  double weight_constant() const override { return 2.0; }
};

class ModifiedLeastSquaresLoss final : public SquareLossBase {
 public:
  ModifiedLeastSquaresLoss() : SquareLossBase("mls") {}

  double phi(double v) const override {
    const double t = std::max(1.0 - v, 0.0);
    return t * t;
  }
  double phi_prime(double v) const override { return -2.0 * std::max(1.0 - v, 0.0); }
  double phi_double_prime(double v) const override { return v < 1.0 ? 2.0 : 0.0; }
  double weight(double v) const override { return std::max(1.0 - v, 0.0); }
  double weight_constant() const override { return 2.0; }
  std::vector<double> nonsmooth_points() const override { return {1.0}; }
};

class TruncatedExponentialLoss final : public Loss {
 public:
  explicit TruncatedExponentialLoss(double t0)
      : Loss("trunc_exp:" + std::to_string(t0)), t0_(t0), cap_(std::exp(-t0)) {}

  double phi(double v) const override { return v >= t0_ ? std::exp(-v) : cap_; }
  double phi_prime(double v) const override { return v >= t0_ ? -std::exp(-v) : 0.0; }
  double phi_double_prime(double v) const override {
    return v >= t0_ ? std::exp(-v) : 0.0;
  }
  double weight(double v) const override { return v >= t0_ ? std::exp(-v) : 0.0; }
  double log_weight(double v) const override { return v >= t0_ ? -v : -kInf; }
  double weight_constant() const override { return 1.0; }
  double theta(double t, double) const override { return logit(t); }
  bool has_closed_form_hypothesis() const override { return false; }
  double weak_hypothesis(double, double) const override {
    throw std::domain_error("truncated exponential: no closed-form weak hypothesis");
  }
  double optimal_f(double p) const override { return 0.5 * logit(p); }
  double inverse_optimal_f(double f) const override { return sigmoid(2.0 * f); }
  std::vector<double> nonsmooth_points() const override { return {t0_}; }

 private:
  double t0_;
  double cap_;
};

// Validator counterexample only; it has no unique stage minimizer, so the
// hypothesis/score maps are not defined.
class SigmoidLoss final : public Loss {
 public:
  SigmoidLoss() : Loss("sigmoid") {}

  double phi(double v) const override { return std::exp(-softplus(v)); }
  double phi_prime(double v) const override {
    return -std::exp(v - 2.0 * softplus(v));
  }
  double phi_double_prime(double v) const override {
    const double sp = softplus(v);
    return std::exp(2.0 * v - 3.0 * sp) - std::exp(v - 3.0 * sp);
  }
  double weight(double v) const override { return std::exp(v - 2.0 * softplus(v)); }
  double weight_constant() const override { return 1.0; }
  double theta(double, double) const override {
    throw std::domain_error("sigmoid loss has no theta map");
  }
  bool has_closed_form_hypothesis() const override { return false; }
  double weak_hypothesis(double, double) const override {
    throw std::domain_error("sigmoid loss has no weak-hypothesis rule");
  }
  double optimal_f(double) const override {
    throw std::domain_error("sigmoid loss has no unique optimal score");
  }
  double inverse_optimal_f(double) const override {
    throw std::domain_error("sigmoid loss has no unique optimal score");
  }
};

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace

double Loss::log_weight(double v) const { return std::log(weight(v)); }

double Loss::risk_sum(const double* y, const double* f, const double* h,
                      double alpha, std::size_t n) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = h ? f[i] + alpha * h[i] : f[i];
    acc += phi(y[i] * s);
  }
  return acc;
}

void Loss::log_weights(const double* y, const double* f, double* out,
                       std::size_t n) const {
  for (std::size_t i = 0; i < n; ++i) out[i] = log_weight(y[i] * f[i]);
}

LossPtr gamma_robust(const GammaRobustParams& params, LossGrade grade) {
  if (!(params.a > 0.0)) throw std::invalid_argument("gamma_robust: a must be > 0");
  const double min_gamma = grade == LossGrade::training ? 1.0 : 1.0 - 1e-12;
  if (grade == LossGrade::training ? !(params.gamma > 1.0) : !(params.gamma >= min_gamma))
    throw std::invalid_argument("gamma_robust: gamma must be > 1 for training");
  return std::make_shared<GammaRobustLoss>(params.a, params.gamma);
}

LossPtr reference_loss(std::string_view name) {
  if (name == "exponential") return std::make_shared<ExponentialLoss>();
  if (name == "logistic") return std::make_shared<LogisticLoss>();
  if (name == "least_squares") return std::make_shared<LeastSquaresLoss>();
  if (name == "modified_least_squares")
    return std::make_shared<ModifiedLeastSquaresLoss>();
  if (name == "truncated_exponential")
    return std::make_shared<TruncatedExponentialLoss>(-2.0);
  if (name == "sigmoid") return std::make_shared<SigmoidLoss>();
  throw std::invalid_argument("reference_loss: unknown loss '" + std::string(name) + "'");
}

LossPtr make_loss(std::string_view id) {
  if (id.rfind("arb:", 0) == 0) {
    const double g = std::stod(std::string(id.substr(4)));
    return gamma_robust({1.0, g});
  }
  if (id == "exp") return reference_loss("exponential");
  if (id == "logit") return reference_loss("logistic");
  if (id == "ls") return reference_loss("least_squares");
  if (id == "mls") return reference_loss("modified_least_squares");
  if (id == "trunc_exp") return reference_loss("truncated_exponential");
  if (id.rfind("trunc_exp:", 0) == 0) {
    const double t0 = std::stod(std::string(id.substr(10)));
    return std::make_shared<TruncatedExponentialLoss>(t0);
  }
  if (id == "sigmoid") return reference_loss("sigmoid");
  throw std::invalid_argument("make_loss: unknown loss id '" + std::string(id) + "'");
}

const ConditionResult* ValidationReport::find(std::string_view name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<double> default_validation_grid() {
  std::vector<double> grid(4001);
  for (std::size_t k = 0; k < grid.size(); ++k)
    grid[k] = -30.0 + 0.015 * static_cast<double>(k);
  return grid;
}

std::vector<double> default_validation_alphas() {
  std::vector<double> alphas;
  for (int k = 1; k <= 19; ++k) alphas.push_back(0.05 * k);
  return alphas;
}

ValidationReport validate_arch_loss(const Loss& loss, std::span<const double> grid,
                                    std::span<const double> alphas) {
  ValidationReport report;
  const std::size_t m = grid.size();
  std::vector<double> phi_v(m), phi_neg(m), dphi_v(m), dphi_neg(m);
  for (std::size_t k = 0; k < m; ++k) {
    phi_v[k] = loss.phi(grid[k]);
    phi_neg[k] = loss.phi(-grid[k]);
    dphi_v[k] = loss.phi_prime(grid[k]);
    dphi_neg[k] = loss.phi_prime(-grid[k]);
  }

  // (i) nonnegative with vanishing infimum
  {
    ConditionResult c;
    c.name = "nonnegative_vanishing_infimum";
    double min_phi = kInf;
    double argmin = 0.0;
    bool nonneg = true;
    for (std::size_t k = 0; k < m; ++k) {
      if (phi_v[k] < -1e-12) {
        nonneg = false;
        c.witness_v = grid[k];
      }
      if (phi_v[k] < min_phi) {
        min_phi = phi_v[k];
        argmin = grid[k];
      }
    }
    c.pass = nonneg && min_phi <= 1e-4;
    if (!c.pass && nonneg) c.witness_v = argmin;
    c.detail = "grid min " + std::to_string(min_phi);
    report.conditions.push_back(std::move(c));
  }

  // (ii) the mixture a*phi(v) + (1-a)*phi(-v) has a unique interior minimum:
  // its derivative changes sign exactly once, from - to +.
  {
    ConditionResult c;
    c.name = "unique_interior_critical_point";
    c.pass = true;
    for (const double alpha : alphas) {
      int prev = 0;
      int down_up = 0;
      int other = 0;
      bool any_nonzero = false;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = alpha * dphi_v[k] - (1.0 - alpha) * dphi_neg[k];
        const int s = sign_of(d);
        if (s == 0) continue;
        any_nonzero = true;
        if (prev != 0 && s != prev) {
          if (prev < 0 && s > 0) {
            ++down_up;
          } else {
            ++other;
          }
          if (down_up + other > 1 || other > 0) c.witness_v = grid[k];
        }
        prev = s;
      }
      if (!(any_nonzero && down_up == 1 && other == 0)) {
        c.pass = false;
        c.witness_alpha = alpha;
        c.detail = "mixture derivative sign changes: " +
                   std::to_string(down_up + other) + " at alpha " +
                   std::to_string(alpha);
        break;
      }
    }
    report.conditions.push_back(std::move(c));
  }

  // (iii) classification calibration: the infimum over the wrong-sign
  // half-line strictly exceeds the global infimum for alpha != 1/2.
  {
    ConditionResult c;
    c.name = "classification_calibration";
    c.pass = true;
    for (const double alpha : alphas) {
      if (std::fabs(alpha - 0.5) < 1e-12) continue;
      double global_min = kInf;
      double wrong_min = kInf;
      for (std::size_t k = 0; k < m; ++k) {
        const double mix = alpha * phi_v[k] + (1.0 - alpha) * phi_neg[k];
        global_min = std::min(global_min, mix);
        if (grid[k] * (2.0 * alpha - 1.0) <= 0.0) wrong_min = std::min(wrong_min, mix);
      }
      if (!(wrong_min - global_min > 1e-9 * std::max(1.0, std::fabs(global_min)))) {
        c.pass = false;
        c.witness_alpha = alpha;
        c.detail = "wrong-side infimum does not exceed the global one";
        break;
      }
    }
    report.conditions.push_back(std::move(c));
  }

  // Advisory: g(v) = phi'(v)/phi'(-v) strictly decreasing. Only meaningful
  // for losses whose derivative is strictly negative on the whole grid.
  {
    ConditionResult c;
    c.name = "derivative_ratio_decreasing";
    bool strictly_negative = true;
    for (std::size_t k = 0; k < m && strictly_negative; ++k)
      if (!(dphi_v[k] < 0.0)) strictly_negative = false;
    c.applicable = strictly_negative;
    if (!strictly_negative) {
      c.pass = true;
      c.detail = "not applicable: phi' vanishes on the grid";
    } else {
      c.pass = true;
      double prev_g = dphi_v[0] / dphi_neg[0];
      for (std::size_t k = 1; k < m; ++k) {
        const double g = dphi_v[k] / dphi_neg[k];
        if (!(g < prev_g)) {
          c.pass = false;
          c.witness_v = grid[k];
          c.detail = "ratio not strictly decreasing";
          break;
        }
        prev_g = g;
      }
    }
    report.conditions.push_back(std::move(c));
  }

  report.pass = report.conditions[0].pass && report.conditions[1].pass &&
                report.conditions[2].pass;
  return report;
}

ValidationReport validate_arch_loss(const Loss& loss) {
  const auto grid = default_validation_grid();
  const auto alphas = default_validation_alphas();
  return validate_arch_loss(loss, grid, alphas);
}

double weight_peak(const Loss& loss) {
  constexpr double lo = -40.0;
  constexpr double hi = 40.0;
  constexpr int scan = 2001;
  const double step = (hi - lo) / (scan - 1);

  double best = -kInf;
  int best_k = 0;
  int direction_changes = 0;
  int prev_dir = 0;
  double prev_w = loss.weight(lo);
  for (int k = 1; k < scan; ++k) {
    const double w = loss.weight(lo + step * k);
    const int dir = sign_of(w - prev_w);
    if (dir != 0) {
      if (prev_dir > 0 && dir < 0) ++direction_changes;
      if (prev_dir < 0 && dir > 0) ++direction_changes;
      prev_dir = dir;
    }
    prev_w = w;
  }
  if (direction_changes > 1)
    throw std::runtime_error("weight_peak: weight rule is not unimodal");
  for (int k = 0; k < scan; ++k) {
    const double w = loss.weight(lo + step * k);
    if (w > best) {
      best = w;
      best_k = k;
    }
  }

  double a = lo + step * std::max(best_k - 1, 0);
  double b = lo + step * std::min(best_k + 1, scan - 1);

  // The weight rule is -phi'/c, so its stationary point is the sign change
  // of phi''. Bisecting that is far more precise than comparing
  // nearly-equal weight values across the flat top.
  if (loss.phi_double_prime(a) < 0.0 && loss.phi_double_prime(b) > 0.0) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (loss.phi_double_prime(mid) < 0.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  }

  // Golden-section fallback when the curvature does not bracket.
  constexpr double inv_phi = 0.61803398874989484820;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = loss.weight(x1);
  double f2 = loss.weight(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = loss.weight(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = loss.weight(x1);
    }
  }
  return 0.5 * (a + b);
}

double solve_weak_hypothesis(const Loss& loss, double p, double f_bar) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("solve_weak_hypothesis: p must lie in (0,1)");
  const double target = std::log(p) - std::log1p(-p);
  const double base = std::log(std::fabs(loss.phi_prime(f_bar))) -
                      std::log(std::fabs(loss.phi_prime(-f_bar)));

  const auto residual = [&](double h) {
    return base + std::log(std::fabs(loss.phi_prime(-f_bar - h))) -
           std::log(std::fabs(loss.phi_prime(f_bar + h))) - target;
  };

  constexpr int scan = 241;
  constexpr double span = 60.0;
  double prev_h = -span;
  double prev_r = residual(prev_h);
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (int k = 1; k < scan; ++k) {
    const double h = -span + 2.0 * span * k / (scan - 1);
    const double r = residual(h);
    if (std::isfinite(prev_r) && std::isfinite(r) && prev_r * r <= 0.0) {
      lo = prev_h;
      hi = h;
      bracketed = true;
      break;
    }
    prev_h = h;
    prev_r = r;
  }
  if (!bracketed)
    throw std::runtime_error("solve_weak_hypothesis: no bracket for the stage equation");

  double r_lo = residual(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double r_mid = residual(mid);
    if ((r_lo <= 0.0) == (r_mid <= 0.0)) {
      lo = mid;
      r_lo = r_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace archboost
