#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace archboost {

// Feature matrix (row-major) with labels in {-1,+1} and an optional
// clean/outlier mask aligned with the rows.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;           // n * d
  std::vector<double> y;           // n, each +-1
  std::vector<std::uint8_t> mask;  // empty, or n flags (1 = contaminated)

  std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }
  bool has_mask() const { return !mask.empty(); }
  void validate() const;  // throws on NaN/Inf features, bad labels, bad mask size
};

// 10 iid standard normal features; positive iff the squared norm exceeds the
// chi-square(10) median.
Dataset gen_hastie(std::size_t n, std::uint64_t seed);

// 20 features from N(0, 2I); positive iff the squared norm exceeds
// 4 * median(chi-square(20)). The threshold is taken literally; the measured
// class balance is reported by tests rather than assumed.
Dataset gen_gaussian_quantiles(std::size_t n, std::uint64_t seed);

// 21 binary +-1 features; the large-margin / pullers / penalizers mixture.
// Every sample satisfies sign(sum_i x_i) == y.
Dataset gen_long_servedio(std::size_t n, std::uint64_t seed);

double hastie_threshold();             // chi-square(10) median
double gaussian_quantiles_threshold(); // 4 * chi-square(20) median

enum class ContaminationKind { label_flip, feature_t_noise };
enum class FlipMode { subset, bernoulli };

struct ContaminationSpec {
  ContaminationKind kind = ContaminationKind::label_flip;
  double epsilon = 0.0;  // in [0, 0.5)
  double t_df = 4.0;     // > 2
  FlipMode mode = FlipMode::subset;
  std::uint64_t seed = 0;
};

// Returns a contaminated copy; untouched samples are bit-identical and the
// mask flags exactly the affected rows (floor(eps*n) of them in subset mode).
Dataset contaminate(const Dataset& data, const ContaminationSpec& spec);

struct CsvSchema {
  std::string label_column = "label";
  // Textual label -> class; empty means labels are parsed numerically as +-1.
  std::map<std::string, int> label_encoding;
  // Empty means every non-label column is a feature, in header order.
  std::vector<std::string> feature_columns;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
void save_csv(const Dataset& data, const std::string& path);

struct DatasetManifest {
  std::string generator;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::optional<ContaminationSpec> contamination;
};

// Writes <path>.manifest.json beside an emitted dataset.
void write_manifest(const DatasetManifest& m, const std::string& dataset_path);

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Seeded permutation partition; sizes are floor(f*n) with the remainder going
// to the last part.
SplitResult split(const Dataset& data, const std::array<double, 3>& fractions,
                  std::uint64_t seed);

// Per-feature affine map fitted on one dataset (mean 0, variance 1) and
// applied to any other.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  void apply(Dataset& data) const;
};

Standardizer fit_standardizer(const Dataset& train);

}  // namespace archboost
