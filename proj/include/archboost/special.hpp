#pragma once

namespace archboost::special {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_p(double a, double x);

double chi_square_cdf(double x, double df);

// Inverse CDF by bisection on the regularized incomplete gamma.
double chi_square_quantile(double p, double df);

double chi_square_median(double df);

}  // namespace archboost::special
