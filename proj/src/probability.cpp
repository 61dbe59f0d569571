#include "archboost/probability.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace archboost {

double product_probability(std::span<const double> per_round_p) {
  double log_pos = 0.0;
  double log_neg = 0.0;
  for (const double p : per_round_p) {
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("product_probability: p must lie in (0,1)");
    // both accumulators go through the same log path, so swapping p <-> 1-p
    // swaps them bit-for-bit whenever 1-p is exact
    log_pos += std::log(p);
    log_neg += std::log(1.0 - p);
  }
  // Two symmetric branches so that swapping p <-> 1-p maps the result to
  // exactly 1 - result.
  const double d = log_neg - log_pos;
  if (d <= 0.0) return 1.0 / (1.0 + std::exp(d));
  return 1.0 - 1.0 / (1.0 + std::exp(-d));
}

double estimate_probability(const ProbabilityEstimator& est, std::span<const double> x) {
  if (est.ensemble == nullptr || est.ensemble->trees.empty())
    throw std::invalid_argument("estimate_probability: no trained ensemble");
  const Ensemble& ens = *est.ensemble;
  if (x.size() != ens.dim)
    throw std::invalid_argument("estimate_probability: feature dimension mismatch");

  if (est.mode == ProbMode::product_formula) {
    std::vector<double> p;
    p.reserve(ens.trees.size());
    for (const auto& tree : ens.trees) p.push_back(tree.leaf(x).clamped_p);
    return product_probability(p);
  }
  return ens.loss->inverse_optimal_f(ens.score(x));
}

}  // namespace archboost
