#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "archboost/kernels.hpp"
#include "archboost/loss.hpp"
#include "archboost/rng.hpp"

using namespace archboost;

namespace {

struct BackendGuard {
  kernels::Backend saved = kernels::active_backend();
  ~BackendGuard() { kernels::force_backend(saved); }
};

}  // namespace

TEST_CASE("vector exp tracks the standard library across the full range") {
  Rng rng(101);
  std::vector<double> x(2053);
  for (auto& v : x) v = 1500.0 * rng.uniform() - 750.0;
  x[0] = 0.0;
  x[1] = 709.78;   // just under overflow
  x[2] = 710.0;    // overflow
  x[3] = -745.2;   // underflow to zero
  x[4] = -708.0;
  x[5] = 1e-300;
  x[6] = -1e-300;

  std::vector<double> out = x;
  kernels::active_ops().exp_inplace(out.data(), out.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ref = std::exp(x[i]);
    if (ref == 0.0 || std::isinf(ref)) {
      CHECK(out[i] == ref);
    } else if (ref < 1e-290) {
      // denormal-adjacent results: absolute agreement only
      CHECK(std::fabs(out[i] - ref) <= 1e-300);
    } else {
      CHECK(std::fabs(out[i] - ref) <= 4e-15 * ref);
    }
  }
}

TEST_CASE("vector softplus: absolute agreement with the scalar reference") {
  Rng rng(103);
  std::vector<double> x(4099), a(4099), b(4099);
  for (auto& v : x) v = 120.0 * rng.uniform() - 60.0;
  kernels::scalar_ops().softplus(x.data(), a.data(), x.size());
  kernels::active_ops().softplus(x.data(), b.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Relative agreement where the value is meaningful, absolute in the tail
    // where log1p resolves below one ulp of 1.0.
    CHECK(std::fabs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::fabs(a[i])));
  }
}

TEST_CASE("scalar and simd loss kernels agree") {
  const kernels::Ops* simd = kernels::avx2_ops();
  if (simd == nullptr) return;  // no vector unit on this host

  Rng rng(107);
  for (const std::size_t n : {1u, 3u, 4u, 127u, 1024u, 2001u}) {
    std::vector<double> y(n), f(n), h(n), ws(n), wv(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
      f[i] = 30.0 * rng.uniform() - 15.0;
      h[i] = 10.0 * rng.uniform() - 5.0;
    }
    for (const double g : {1.5, 2.0, 6.0}) {
      const double rs = kernels::scalar_ops().risk_sum_gamma(1.0, g, y.data(), f.data(),
                                                             h.data(), 0.37, n);
      const double rv = simd->risk_sum_gamma(1.0, g, y.data(), f.data(), h.data(), 0.37, n);
      CHECK(std::fabs(rs - rv) <= 1e-11 * rs);

      kernels::scalar_ops().log_weights_gamma(1.0, g, y.data(), f.data(), ws.data(), n);
      simd->log_weights_gamma(1.0, g, y.data(), f.data(), wv.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::fabs(ws[i] - wv[i]) <= 1e-12 * std::max(1.0, std::fabs(ws[i])));
    }
    const double es =
        kernels::scalar_ops().risk_sum_exp(y.data(), f.data(), h.data(), 0.37, n);
    const double ev = simd->risk_sum_exp(y.data(), f.data(), h.data(), 0.37, n);
    CHECK(std::fabs(es - ev) <= 1e-11 * es);

    kernels::scalar_ops().log_weights_exp(y.data(), f.data(), ws.data(), n);
    simd->log_weights_exp(y.data(), f.data(), wv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ws[i] == wv[i]);
  }
}

TEST_CASE("risk sums saturate to +inf without producing NaN") {
  // Exponential-loss sums legitimately overflow on strongly misclassified
  // scores; both backends must return +inf, not NaN.
  std::vector<double> y = {1.0, -1.0, 1.0, -1.0, 1.0};
  std::vector<double> f = {-800.0, 800.0, 0.5, -0.25, 1.0};
  for (const kernels::Ops* ops : {&kernels::scalar_ops(), kernels::avx2_ops()}) {
    if (!ops) continue;
    const double r = ops->risk_sum_exp(y.data(), f.data(), nullptr, 0.0, y.size());
    CHECK(std::isinf(r));
    CHECK(r > 0.0);
  }
}

TEST_CASE("backend forcing is honored and losses follow the active backend") {
  const kernels::Ops* simd = kernels::avx2_ops();
  if (simd == nullptr) return;
  BackendGuard guard;

  const auto loss = make_loss("arb:2");
  std::vector<double> y = {1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0};
  std::vector<double> f = {0.3, -1.2, 2.0, 0.1, -0.7, 1.4, 0.9};

  kernels::force_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  const double rs = loss->risk_sum(y.data(), f.data(), nullptr, 0.0, y.size());

  kernels::force_backend(kernels::Backend::avx2);
  CHECK(kernels::active_backend() == kernels::Backend::avx2);
  const double rv = loss->risk_sum(y.data(), f.data(), nullptr, 0.0, y.size());

  CHECK(std::fabs(rs - rv) <= 1e-12 * rs);
}
