#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "archboost/dataset.hpp"
#include "archboost/rng.hpp"

namespace archboost::testing {

// Random weighted binary dataset for property tests.
inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d) {
  Dataset data;
  data.n = n;
  data.d = d;
  data.x.resize(n * d);
  data.y.resize(n);
  for (auto& v : data.x) v = 4.0 * rng.uniform() - 2.0;
  for (auto& v : data.y) v = rng.uniform() < 0.5 ? 1.0 : -1.0;
  return data;
}

inline std::vector<double> random_weights(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& v : w) {
    v = 0.1 + 0.9 * rng.uniform();
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

// One round of Real AdaBoost with a two-leaf weighted-Gini stump, written
// independently of the library implementation (same tie rules: lowest
// feature, then lowest threshold; points equal to the threshold go right).
struct ReferenceStump {
  int feature = -1;  // -1: no improving split, single region
  double threshold = 0.0;
  double h_left = 0.0;
  double h_right = 0.0;

  double value(const double* x) const {
    if (feature < 0) return h_right;
    return x[feature] < threshold ? h_left : h_right;
  }
};

inline double ref_gini(double w_pos, double w_all) {
  if (w_all <= 0.0) return 0.0;
  const double p = w_pos / w_all;
  return 2.0 * p * (1.0 - p) * w_all;
}

inline ReferenceStump reference_adaboost_stump(const Dataset& data,
                                               const std::vector<double>& w,
                                               double clamp = 0.9999,
                                               double min_leaf = 1e-3) {
  const std::size_t n = data.n;
  double tot = 0.0, tot_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tot += w[i];
    if (data.y[i] > 0) tot_pos += w[i];
  }
  const double parent = ref_gini(tot_pos, tot);

  ReferenceStump best;
  double best_cost = parent;
  for (std::size_t f = 0; f < data.d; ++f) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = data.x[a * data.d + f];
      const double xb = data.x[b * data.d + f];
      return xa != xb ? xa < xb : a < b;
    });
    double wl = 0.0, wl_pos = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::size_t i = order[k];
      wl += w[i];
      if (data.y[i] > 0) wl_pos += w[i];
      const double a = data.x[i * data.d + f];
      const double b = data.x[order[k + 1] * data.d + f];
      if (a == b) continue;
      const double thr = 0.5 * (a + b);
      if (!(a < thr)) continue;
      if (wl < min_leaf || tot - wl < min_leaf) continue;
      const double cost = ref_gini(wl_pos, wl) + ref_gini(tot_pos - wl_pos, tot - wl);
      if (cost < best_cost) {
        best_cost = cost;
        best.feature = static_cast<int>(f);
        best.threshold = thr;
      }
    }
  }

  double wl = 0.0, wl_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = best.feature >= 0 && data.x[i * data.d + best.feature] < best.threshold;
    if (left) {
      wl += w[i];
      if (data.y[i] > 0) wl_pos += w[i];
    }
  }
  const auto half_logit = [&](double p_raw) {
    const double p = 0.5 + clamp * (p_raw - 0.5);
    return 0.5 * (std::log(p) - std::log1p(-p));
  };
  if (best.feature >= 0) {
    best.h_left = half_logit(wl > 0 ? wl_pos / wl : 0.5);
    best.h_right = half_logit(tot - wl > 0 ? (tot_pos - wl_pos) / (tot - wl) : 0.5);
  } else {
    best.h_right = half_logit(tot > 0 ? tot_pos / tot : 0.5);
  }
  return best;
}

// Weights after one Real AdaBoost round (unit step), normalized.
inline std::vector<double> reference_adaboost_weights(const Dataset& data,
                                                      const std::vector<double>& w0) {
  const ReferenceStump stump = reference_adaboost_stump(data, w0);
  std::vector<double> w(data.n);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    w[i] = w0[i] * std::exp(-data.y[i] * stump.value(data.x.data() + i * data.d));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace archboost::testing
