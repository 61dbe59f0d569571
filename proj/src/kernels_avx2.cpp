// AVX2+FMA variants of the training kernels. Compiled with -mavx2 -mfma;
// callers must gate on runtime CPU support (see kernels.cpp).
//
// exp/log use the classic Cephes double-precision reductions (rational
// minimax polynomials, ~1-2 ulp), evaluated lane-wise.

#include "archboost/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace archboost::kernels {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

inline __m256d set1(double x) { return _mm256_set1_pd(x); }

// exp(x): x = n*ln2 + r, e^r = 1 + 2rP(r^2)/(Q(r^2) - rP(r^2)), scale by 2^n.
inline __m256d exp_pd(__m256d x) {
  const __m256d hi = set1(709.782712893383996843);   // log(DBL_MAX)
  const __m256d lo = set1(-745.133219101941108420);  // log(denorm_min)

  const __m256d overflow = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n = _mm256_round_pd(
      _mm256_mul_pd(x, set1(1.44269504088896340736)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, set1(1.42860682030941723212e-6), r);
  const __m256d r2 = _mm256_mul_pd(r, r);

  __m256d p = set1(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, r2, set1(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, r2, set1(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = set1(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, r2, set1(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, r2, set1(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, r2, set1(2.00000000000000000005e0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(set1(2.0), e, set1(1.0));

  // 2^n in two factors (n1 = n/2 rounded toward -inf, n2 = n - n1) so the
  // intermediate exponents stay in the normal range even near underflow.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m128i n1_32 = _mm_srai_epi32(n32, 1);
  const __m128i n2_32 = _mm_sub_epi32(n32, n1_32);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d s1 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1_32), bias), 52));
  const __m256d s2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2_32), bias), 52));
  e = _mm256_mul_pd(_mm256_mul_pd(e, s1), s2);

  e = _mm256_blendv_pd(e, set1(HUGE_VAL), overflow);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), underflow);
  return e;
}

// log(x) for positive normal x: frexp to m in [sqrt(1/2), sqrt(2)), rational
// correction on z = m - 1, exponent re-added with a split ln2.
inline __m256d log_pd(__m256d x) {
  const __m256i xi = _mm256_castpd_si256(x);

  // Biased exponent per lane, packed down to int32 and converted.
  const __m256i er = _mm256_srli_epi64(xi, 52);
  const __m256i packed = _mm256_permutevar8x32_epi32(
      er, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0));
  __m256d ef = _mm256_cvtepi32_pd(_mm256_castsi256_si128(packed));
  ef = _mm256_sub_pd(ef, set1(1022.0));  // m in [0.5, 1)

  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i half_exp = _mm256_set1_epi64x(0x3fe0000000000000LL);
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(xi, mant_mask), half_exp));

  const __m256d below = _mm256_cmp_pd(m, set1(0.70710678118654752440), _CMP_LT_OQ);
  m = _mm256_add_pd(m, _mm256_and_pd(below, m));            // m *= 2
  ef = _mm256_sub_pd(ef, _mm256_and_pd(below, set1(1.0)));  // e -= 1
  const __m256d z = _mm256_sub_pd(m, set1(1.0));

  __m256d p = set1(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, z, set1(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, z, set1(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, z, set1(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, z, set1(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, z, set1(7.70838733755885391666e0));

  __m256d q = _mm256_add_pd(z, set1(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, z, set1(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, z, set1(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, z, set1(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, z, set1(2.31251620126765340583e1));

  const __m256d z2 = _mm256_mul_pd(z, z);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, z2), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(ef, set1(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(set1(0.5), z2, y);
  __m256d res = _mm256_add_pd(z, y);
  return _mm256_fmadd_pd(ef, set1(0.693359375), res);
}

// log(1 + exp(u)) = max(u,0) + log(1 + exp(-|u|))
inline __m256d softplus_pd(__m256d u) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_max_pd(u, zero);
  const __m256d nabs = _mm256_min_pd(u, _mm256_sub_pd(zero, u));
  const __m256d t = exp_pd(nabs);
  return _mm256_add_pd(pos, log_pd(_mm256_add_pd(set1(1.0), t)));
}

inline __m256d margins_pd(const double* y, const double* f, const double* h,
                          double alpha, std::size_t i) {
  __m256d fv = _mm256_loadu_pd(f + i);
  if (h) fv = _mm256_fmadd_pd(set1(alpha), _mm256_loadu_pd(h + i), fv);
  return _mm256_mul_pd(_mm256_loadu_pd(y + i), fv);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

inline double softplus1(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double risk_sum_gamma_v(double a, double gamma, const double* y, const double* f,
                        const double* h, double alpha, std::size_t n) {
  const std::size_t nv = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d u = _mm256_mul_pd(set1(a), margins_pd(y, f, h, alpha, i));
    const __m256d arg =
        _mm256_mul_pd(set1(gamma), _mm256_sub_pd(set1(kLn2), softplus_pd(u)));
    acc = _mm256_add_pd(acc, exp_pd(arg));
  }
  double sum = hsum(acc);
  for (std::size_t i = nv; i < n; ++i) {
    const double s = h ? f[i] + alpha * h[i] : f[i];
    const double u = a * (y[i] * s);
    sum += std::exp(gamma * (kLn2 - softplus1(u)));
  }
  return sum;
}

double risk_sum_exp_v(const double* y, const double* f, const double* h,
                      double alpha, std::size_t n) {
  const std::size_t nv = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d m = margins_pd(y, f, h, alpha, i);
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(zero, m)));
  }
  double sum = hsum(acc);
  for (std::size_t i = nv; i < n; ++i) {
    const double s = h ? f[i] + alpha * h[i] : f[i];
    sum += std::exp(-(y[i] * s));
  }
  return sum;
}

void log_weights_gamma_v(double a, double gamma, const double* y, const double* f,
                         double* out, std::size_t n) {
  const std::size_t nv = n & ~std::size_t{3};
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d u = _mm256_mul_pd(set1(a), margins_pd(y, f, nullptr, 0.0, i));
    const __m256d w = _mm256_fnmadd_pd(set1(gamma + 1.0), softplus_pd(u), u);
    _mm256_storeu_pd(out + i, w);
  }
  for (std::size_t i = nv; i < n; ++i) {
    const double u = a * (y[i] * f[i]);
    out[i] = u - (gamma + 1.0) * softplus1(u);
  }
}

void log_weights_exp_v(const double* y, const double* f, double* out, std::size_t n) {
  const std::size_t nv = n & ~std::size_t{3};
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d m = margins_pd(y, f, nullptr, 0.0, i);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(zero, m));
  }
  for (std::size_t i = nv; i < n; ++i) out[i] = -(y[i] * f[i]);
}

void exp_inplace_v(double* x, std::size_t n) {
  const std::size_t nv = n & ~std::size_t{3};
  for (std::size_t i = 0; i < nv; i += 4) {
    _mm256_storeu_pd(x + i, exp_pd(_mm256_loadu_pd(x + i)));
  }
  for (std::size_t i = nv; i < n; ++i) x[i] = std::exp(x[i]);
}

void softplus_v(const double* x, double* out, std::size_t n) {
  const std::size_t nv = n & ~std::size_t{3};
  for (std::size_t i = 0; i < nv; i += 4) {
    _mm256_storeu_pd(out + i, softplus_pd(_mm256_loadu_pd(x + i)));
  }
  for (std::size_t i = nv; i < n; ++i) out[i] = softplus1(x[i]);
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops ops{
      "avx2",            risk_sum_gamma_v, risk_sum_exp_v, log_weights_gamma_v,
      log_weights_exp_v, exp_inplace_v,    softplus_v,
  };
  return &ops;
}

}  // namespace archboost::kernels

#else

namespace archboost::kernels {
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace archboost::kernels

#endif
