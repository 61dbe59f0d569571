#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace archboost {

// Index of the gamma-robust family phi_{a,gamma}(v) = 2^gamma / (1 + e^{a v})^gamma.
// a and gamma are family indices, not tuning parameters; a defaults to 1.
struct GammaRobustParams {
  double a = 1.0;
  double gamma = 2.0;
};

// gamma == 1 (the sigmoid member) is only constructible for validator tests.
enum class LossGrade { training, validator };

// A margin loss phi with its derivatives, weight rule, theta map, and the
// closed-form weak hypothesis / optimal score where one exists. Immutable
// after construction and safe to share across threads.
class Loss {
 public:
  virtual ~Loss() = default;

  const std::string& name() const { return name_; }

  virtual double phi(double v) const = 0;
  virtual double phi_prime(double v) const = 0;
  virtual double phi_double_prime(double v) const = 0;

  // weight(v) * weight_constant() == -phi_prime(v) wherever the rule is
  // active; always nonnegative.
  virtual double weight(double v) const = 0;
  virtual double weight_constant() const = 0;
  virtual double log_weight(double v) const;

  // theta(t): strictly increasing, theta(1/2) = 0. Square-type losses also
  // need the current score.
  virtual double theta(double t, double f = 0.0) const = 0;

  virtual bool has_closed_form_hypothesis() const { return true; }
  virtual bool hypothesis_uses_f() const { return false; }
  virtual double weak_hypothesis(double p, double f = 0.0) const = 0;

  virtual double optimal_f(double p) const = 0;
  virtual double inverse_optimal_f(double f) const = 0;

  // Locations where phi is not twice differentiable (kinks), if any.
  virtual std::vector<double> nonsmooth_points() const { return {}; }

  // Batch operations over sample arrays. Margins are y[i]*(f[i]+alpha*h[i]);
  // h may be null. Defaults loop the scalar evaluators; the gamma family and
  // the exponential loss route to the runtime-dispatched kernels.
  virtual double risk_sum(const double* y, const double* f, const double* h,
                          double alpha, std::size_t n) const;
  virtual void log_weights(const double* y, const double* f, double* out,
                           std::size_t n) const;

 protected:
  explicit Loss(std::string name) : name_(std::move(name)) {}

 private:
  std::string name_;
};

using LossPtr = std::shared_ptr<const Loss>;

// Throws std::invalid_argument unless a > 0 and gamma > 1 (training grade)
// or gamma >= 1 (validator grade).
LossPtr gamma_robust(const GammaRobustParams& params,
                     LossGrade grade = LossGrade::training);

// name in {exponential, logistic, least_squares, modified_least_squares,
// truncated_exponential, sigmoid}
LossPtr reference_loss(std::string_view name);

// CLI identifiers: "arb:<gamma>", "exp", "logit", "ls", "mls",
// "trunc_exp[:<t0>]", "sigmoid".
LossPtr make_loss(std::string_view id);

struct ConditionResult {
  std::string name;
  bool applicable = true;
  bool pass = false;
  double witness_v = 0.0;
  double witness_alpha = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  bool pass = false;  // conditions (i)-(iii) jointly
  const ConditionResult* find(std::string_view name) const;
};

// Numerically checks the Arch boosting loss conditions on the given margin
// grid and mixture coefficients:
//   nonnegative_vanishing_infimum   phi >= 0, inf phi ~ 0
//   unique_interior_critical_point  a*phi(v)+(1-a)*phi(-v) has one minimum
//   classification_calibration      wrong-sign infimum exceeds the global one
// plus the advisory derivative-ratio monotonicity check (applicable only
// when phi' < 0 on the whole grid).
ValidationReport validate_arch_loss(const Loss& loss, std::span<const double> grid,
                                    std::span<const double> alphas);
ValidationReport validate_arch_loss(const Loss& loss);

std::vector<double> default_validation_grid();    // 4001 points on [-30, 30]
std::vector<double> default_validation_alphas();  // {0.05, 0.10, ..., 0.95}

// argmax of the weight rule via bracketing scan plus golden-section.
// Throws if the scan sees more than one local maximum.
double weight_peak(const Loss& loss);

// Solves the stage equation
//   phi'(F)phi'(-F-h) / (phi'(-F)phi'(F+h)) = p/(1-p)
// for h by bracketing + bisection. Used for losses without a closed-form
// weak hypothesis. Throws when no bracket exists.
double solve_weak_hypothesis(const Loss& loss, double p, double f_bar);

}  // namespace archboost
