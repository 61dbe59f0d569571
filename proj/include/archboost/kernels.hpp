#pragma once

#include <cstddef>

namespace archboost::kernels {

// The arithmetic inner loops of training: loss sums over per-sample margins
// and the log-weight update. Each operation has a scalar reference
// implementation and (on x86-64 with AVX2+FMA) a vectorized variant; the
// backend is selected once at runtime and can be forced for tests or via the
// ARCHBOOST_SIMD environment variable ("scalar", "avx2", "auto").
//
// Margins are y[i] * (f[i] + alpha * h[i]); h may be null, in which case the
// margin is y[i] * f[i] and alpha is ignored.

enum class Backend { scalar, avx2 };

struct Ops {
  const char* name;

  // sum_i phi_{a,gamma}(margin_i) with phi_{a,gamma}(v) = 2^g / (1 + e^{a v})^g
  double (*risk_sum_gamma)(double a, double gamma, const double* y, const double* f,
                           const double* h, double alpha, std::size_t n);

  // sum_i exp(-margin_i)
  double (*risk_sum_exp)(const double* y, const double* f, const double* h,
                         double alpha, std::size_t n);

  // out[i] = a*v - (gamma+1) * softplus(a*v), v = y[i]*f[i]  (log of e^{av}(1+e^{av})^{-g-1})
  void (*log_weights_gamma)(double a, double gamma, const double* y, const double* f,
                            double* out, std::size_t n);

  // out[i] = -y[i]*f[i]
  void (*log_weights_exp)(const double* y, const double* f, double* out, std::size_t n);

  // x[i] = exp(x[i])
  void (*exp_inplace)(double* x, std::size_t n);

  // out[i] = log(1 + exp(x[i]))
  void (*softplus)(const double* x, double* out, std::size_t n);
};

const Ops& scalar_ops();

// Null when the binary or the CPU lacks AVX2/FMA support.
const Ops* avx2_ops();

const Ops& active_ops();
Backend active_backend();
void force_backend(Backend b);

}  // namespace archboost::kernels
