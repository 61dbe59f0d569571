#include "archboost/kernels.hpp"

#include <cmath>

namespace archboost::kernels {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

inline double softplus1(double u) {
  // log(1 + e^u) = max(u, 0) + log1p(e^{-|u|})
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

inline double margin_at(const double* y, const double* f, const double* h,
                        double alpha, std::size_t i) {
  const double s = h ? f[i] + alpha * h[i] : f[i];
  return y[i] * s;
}

double risk_sum_gamma_s(double a, double gamma, const double* y, const double* f,
                        const double* h, double alpha, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = a * margin_at(y, f, h, alpha, i);
    acc += std::exp(gamma * (kLn2 - softplus1(u)));
  }
  return acc;
}

double risk_sum_exp_s(const double* y, const double* f, const double* h,
                      double alpha, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::exp(-margin_at(y, f, h, alpha, i));
  }
  return acc;
}

void log_weights_gamma_s(double a, double gamma, const double* y, const double* f,
                         double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double u = a * (y[i] * f[i]);
    out[i] = u - (gamma + 1.0) * softplus1(u);
  }
}

void log_weights_exp_s(const double* y, const double* f, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -(y[i] * f[i]);
}

void exp_inplace_s(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

void softplus_s(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = softplus1(x[i]);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar",          risk_sum_gamma_s, risk_sum_exp_s, log_weights_gamma_s,
      log_weights_exp_s, exp_inplace_s,    softplus_s,
  };
  return ops;
}

}  // namespace archboost::kernels
