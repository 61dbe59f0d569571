#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "archboost/booster.hpp"
#include "archboost/dataset.hpp"
#include "archboost/loss.hpp"
#include "archboost/tree.hpp"

namespace archboost {

struct RegionBreakdown {
  int region_id = 0;
  double p = 0.5;  // weighted class probability from the provided weights
  double eta = 0.0;
  double outlier_weight = 0.0;
  double inlier_weight = 0.0;
  bool neutral = false;  // p == 1/2: the region contributes zero
  bool condition_holds = true;
};

struct BreakdownReport {
  std::vector<RegionBreakdown> regions;
  double inner_product = 0.0;  // <-g_o, h> over clean samples
  bool condition_all = true;
  bool direction_preserved = true;
};

// Per-region weight-ratio check with eta_j = |p_j - 1/2| / min(p_j, 1 - p_j):
// when the outlier weight in every region is at most eta_j times the inlier
// weight, the descent direction on the clean samples is preserved. Region
// probabilities are recomputed from the passed weights; hypothesis values are
// read from the tree leaves.
BreakdownReport check_breakdown(const RegionTree& tree, const Dataset& data,
                                std::span<const double> weights,
                                std::span<const std::uint8_t> outlier_mask);

nlohmann::json breakdown_to_json(const BreakdownReport& report);

// sqrt(phi(0)/lambda) + m_k * |phi'(margin)| / (2 lambda)
double influence_bound(const Loss& loss, double lambda, double m_k, double margin_at_z);

// Max over samples of |(1+e^{yF})^{-1} - e^{-y A(F)}| with
// A(F) = y log(1+e^{yF}); at most 1e-12 for |yF| <= 30.
double invex_transform_check(std::span<const double> scores,
                             std::span<const double> labels);

struct OutlierScore {
  std::vector<int> counts;            // per-sample misclassification counts
  std::vector<std::size_t> flagged;   // counts strictly above the cutoff
  double cutoff = 0.0;                // threshold_fraction * rounds
  std::size_t flagged_outliers = 0;   // flagged samples that the mask marks
  double recovery_ratio = 0.0;        // flagged_outliers / flagged (0 if none)
  bool has_ratio = false;
};

OutlierScore outlier_detect(const TrainTrace& trace, double threshold_fraction = 0.75,
                            std::span<const std::uint8_t> mask = {});

// CSV with columns index,count,flagged.
void write_outlier_csv(const OutlierScore& score, const std::string& path);

}  // namespace archboost
