#pragma once

#include <span>

#include "archboost/booster.hpp"

namespace archboost {

enum class ProbMode { product_formula, inverse_link };

// Conditional class-probability estimates from a trained ensemble.
//
// product_formula combines the per-iteration clamped region probabilities,
//   P = prod_t p_t / (prod_t p_t + prod_t (1 - p_t)),
// evaluated in log space. The step sizes alpha_t do not enter the product;
// it is the per-round estimator, not a calibrated probability.
//
// inverse_link inverts the loss's optimal score map at F_T(x).
struct ProbabilityEstimator {
  ProbMode mode = ProbMode::product_formula;
  const Ensemble* ensemble = nullptr;
};

double estimate_probability(const ProbabilityEstimator& est, std::span<const double> x);

// The log-space product over explicit per-round probabilities; exposed for
// direct checks against the naive product.
double product_probability(std::span<const double> per_round_p);

}  // namespace archboost
