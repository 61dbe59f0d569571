#include "archboost/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace archboost {

BreakdownReport check_breakdown(const RegionTree& tree, const Dataset& data,
                                std::span<const double> weights,
                                std::span<const std::uint8_t> outlier_mask) {
  if (weights.size() != data.n || outlier_mask.size() != data.n)
    throw std::invalid_argument("check_breakdown: length mismatch");

  const std::size_t regions = tree.leaves.size();
  std::vector<double> w_pos(regions, 0.0), w_all(regions, 0.0);
  std::vector<double> w_out(regions, 0.0), w_in(regions, 0.0);

  BreakdownReport report;
  for (std::size_t i = 0; i < data.n; ++i) {
    const int j = tree.leaf_index(data.row(i));
    w_all[j] += weights[i];
    if (data.y[i] > 0) w_pos[j] += weights[i];
    if (outlier_mask[i]) {
      w_out[j] += weights[i];
    } else {
      w_in[j] += weights[i];
      report.inner_product += weights[i] * data.y[i] * tree.leaves[j].h_value;
    }
  }

  for (std::size_t j = 0; j < regions; ++j) {
    RegionBreakdown r;
    r.region_id = static_cast<int>(j);
    r.p = w_all[j] > 0.0 ? w_pos[j] / w_all[j] : 0.5;
    r.outlier_weight = w_out[j];
    r.inlier_weight = w_in[j];
    if (r.p == 0.5) {
      r.neutral = true;
      r.eta = 0.0;
      r.condition_holds = true;
    } else {
      const double mn = std::min(r.p, 1.0 - r.p);
      if (mn == 0.0) {
        r.eta = std::numeric_limits<double>::infinity();
        r.condition_holds = r.inlier_weight > 0.0 || r.outlier_weight == 0.0;
      } else {
        r.eta = std::fabs(r.p - 0.5) / mn;
        r.condition_holds = r.outlier_weight <= r.eta * r.inlier_weight;
      }
    }
    if (!r.condition_holds) report.condition_all = false;
    report.regions.push_back(r);
  }
  report.direction_preserved = report.inner_product >= 0.0;
  return report;
}

nlohmann::json breakdown_to_json(const BreakdownReport& report) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : report.regions)
    regions.push_back({{"region", r.region_id},
                       {"p", r.p},
                       {"eta", r.eta},
                       {"outlier_weight", r.outlier_weight},
                       {"inlier_weight", r.inlier_weight},
                       {"neutral", r.neutral},
                       {"condition_holds", r.condition_holds}});
  return {{"regions", std::move(regions)},
          {"inner_product", report.inner_product},
          {"condition_all", report.condition_all},
          {"direction_preserved", report.direction_preserved}};
}

double influence_bound(const Loss& loss, double lambda, double m_k,
                       double margin_at_z) {
  if (!(lambda > 0.0)) throw std::invalid_argument("influence_bound: lambda must be > 0");
  if (!(m_k > 0.0)) throw std::invalid_argument("influence_bound: m_k must be > 0");
  const double c_phi = loss.phi(0.0);
  return std::sqrt(c_phi / lambda) +
         m_k * std::fabs(loss.phi_prime(margin_at_z)) / (2.0 * lambda);
}

double invex_transform_check(std::span<const double> scores,
                             std::span<const double> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("invex_transform_check: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double u = labels[i] * scores[i];
    const double direct = 1.0 / (1.0 + std::exp(u));
    const double sp = u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
    const double via_transform = std::exp(-sp);
    worst = std::max(worst, std::fabs(direct - via_transform));
  }
  return worst;
}

OutlierScore outlier_detect(const TrainTrace& trace, double threshold_fraction,
                            std::span<const std::uint8_t> mask) {
  OutlierScore score;
  score.counts = trace.misclass_counts();
  score.cutoff = threshold_fraction * static_cast<double>(trace.rounds());
  for (std::size_t i = 0; i < score.counts.size(); ++i)
    if (static_cast<double>(score.counts[i]) > score.cutoff) score.flagged.push_back(i);
  if (!mask.empty()) {
    if (mask.size() != trace.n)
      throw std::invalid_argument("outlier_detect: mask length mismatch");
    score.has_ratio = true;
    for (const std::size_t i : score.flagged)
      if (mask[i]) ++score.flagged_outliers;
    score.recovery_ratio =
        score.flagged.empty()
            ? 0.0
            : static_cast<double>(score.flagged_outliers) /
                  static_cast<double>(score.flagged.size());
  }
  return score;
}

void write_outlier_csv(const OutlierScore& score, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("outlier csv: cannot write '" + path + "'");
  out << "index,count,flagged\n";
  std::size_t next_flag = 0;
  for (std::size_t i = 0; i < score.counts.size(); ++i) {
    bool flagged = false;
    if (next_flag < score.flagged.size() && score.flagged[next_flag] == i) {
      flagged = true;
      ++next_flag;
    }
    out << i << "," << score.counts[i] << "," << (flagged ? 1 : 0) << "\n";
  }
  if (!out) throw std::runtime_error("outlier csv: write failure on '" + path + "'");
}

}  // namespace archboost
