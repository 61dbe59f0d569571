#include "archboost/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "archboost/rng.hpp"
#include "archboost/special.hpp"

namespace archboost {

namespace {

void check_spec(const ContaminationSpec& spec) {
  if (!(spec.epsilon >= 0.0 && spec.epsilon < 0.5))
    throw std::invalid_argument("contaminate: epsilon must lie in [0, 0.5)");
  if (!(spec.t_df > 2.0))
    throw std::invalid_argument("contaminate: t_df must be > 2");
}

Dataset subset_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.n = rows.size();
  out.d = data.d;
  out.x.resize(out.n * out.d);
  out.y.resize(out.n);
  if (data.has_mask()) out.mask.resize(out.n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    std::copy_n(data.x.data() + r * data.d, data.d, out.x.data() + i * out.d);
    out.y[i] = data.y[r];
    if (data.has_mask()) out.mask[i] = data.mask[r];
  }
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("csv: non-numeric value '" + s + "' on line " +
                             std::to_string(line_no));
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size())
    throw std::runtime_error("csv: non-numeric value '" + s + "' on line " +
                             std::to_string(line_no));
  return v;
}

}  // namespace

void Dataset::validate() const {
  if (x.size() != n * d || y.size() != n)
    throw std::invalid_argument("dataset: inconsistent dimensions");
  for (const double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature");
  for (const double v : y)
    if (v != 1.0 && v != -1.0)
      throw std::invalid_argument("dataset: labels must be +-1");
  if (!mask.empty() && mask.size() != n)
    throw std::invalid_argument("dataset: mask size mismatch");
}

double hastie_threshold() {
  static const double t = special::chi_square_median(10.0);
  return t;
}

double gaussian_quantiles_threshold() {
  static const double t = 4.0 * special::chi_square_median(20.0);
  return t;
}

Dataset gen_hastie(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_hastie: n must be >= 1");
  constexpr std::size_t d = 10;
  const double threshold = hastie_threshold();
  Dataset out;
  out.n = n;
  out.d = d;
  out.x.resize(n * d);
  out.y.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = rng.normal();
      out.x[i * d + j] = v;
      ss += v * v;
    }
    out.y[i] = ss > threshold ? 1.0 : -1.0;
  }
  return out;
}

Dataset gen_gaussian_quantiles(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_gaussian_quantiles: n must be >= 1");
  constexpr std::size_t d = 20;
  const double sqrt2 = std::sqrt(2.0);
  const double threshold = gaussian_quantiles_threshold();
  Dataset out;
  out.n = n;
  out.d = d;
  out.x.resize(n * d);
  out.y.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = sqrt2 * rng.normal();
      out.x[i * d + j] = v;
      ss += v * v;
    }
    out.y[i] = ss > threshold ? 1.0 : -1.0;
  }
  return out;
}

Dataset gen_long_servedio(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_long_servedio: n must be >= 1");
  constexpr std::size_t d = 21;
  Dataset out;
  out.n = n;
  out.d = d;
  out.x.resize(n * d);
  out.y.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = rng.uniform() < 0.5 ? 1.0 : -1.0;
    out.y[i] = y;
    double* row = out.x.data() + i * d;
    const double u = rng.uniform();
    if (u < 0.25) {
      // large margin: every coordinate agrees with the label
      for (std::size_t j = 0; j < d; ++j) row[j] = y;
    } else if (u < 0.5) {
      // pullers: first 11 agree, last 10 oppose
      for (std::size_t j = 0; j < 11; ++j) row[j] = y;
      for (std::size_t j = 11; j < d; ++j) row[j] = -y;
    } else {
      // penalizers: 5 of the first 11 and 6 of the last 10 agree
      for (std::size_t j = 0; j < d; ++j) row[j] = -y;
      for (const std::size_t j : rng.sample_without_replacement(11, 5)) row[j] = y;
      for (const std::size_t j : rng.sample_without_replacement(10, 6)) row[11 + j] = y;
    }
  }
  return out;
}

Dataset contaminate(const Dataset& data, const ContaminationSpec& spec) {
  check_spec(spec);
  Dataset out = data;
  if (spec.epsilon == 0.0) return out;
  if (out.mask.empty()) out.mask.assign(out.n, 0);
  Rng rng(spec.seed);

  std::vector<std::size_t> affected;
  if (spec.kind == ContaminationKind::label_flip && spec.mode == FlipMode::bernoulli) {
    for (std::size_t i = 0; i < out.n; ++i)
      if (rng.uniform() < spec.epsilon) affected.push_back(i);
  } else {
    const std::size_t k =
        static_cast<std::size_t>(std::floor(spec.epsilon * static_cast<double>(out.n)));
    affected = rng.sample_without_replacement(out.n, k);
  }

  for (const std::size_t i : affected) {
    out.mask[i] = 1;
    if (spec.kind == ContaminationKind::label_flip) {
      out.y[i] = -out.y[i];
    } else {
      for (std::size_t j = 0; j < out.d; ++j)
        out.x[i * out.d + j] += rng.student_t(spec.t_df);
    }
  }
  return out;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);

  std::size_t label_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == schema.label_column) label_idx = j;
  if (label_idx == header.size())
    throw std::runtime_error("csv: label column '" + schema.label_column +
                             "' not found in '" + path + "'");

  std::vector<std::size_t> feature_idx;
  if (schema.feature_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (j != label_idx) feature_idx.push_back(j);
  } else {
    for (const auto& name : schema.feature_columns) {
      bool found = false;
      for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) {
          feature_idx.push_back(j);
          found = true;
          break;
        }
      }
      if (!found)
        throw std::runtime_error("csv: feature column '" + name + "' not found");
    }
  }

  Dataset out;
  out.d = feature_idx.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("csv: ragged row on line " + std::to_string(line_no));
    for (const std::size_t j : feature_idx)
      out.x.push_back(parse_number(fields[j], line_no));
    const std::string& raw = fields[label_idx];
    double label = 0.0;
    if (schema.label_encoding.empty()) {
      label = parse_number(raw, line_no);
    } else {
      const auto it = schema.label_encoding.find(raw);
      if (it == schema.label_encoding.end())
        throw std::runtime_error("csv: unknown label '" + raw + "' on line " +
                                 std::to_string(line_no));
      label = it->second;
    }
    if (label != 1.0 && label != -1.0)
      throw std::runtime_error("csv: label must map to +-1 on line " +
                               std::to_string(line_no));
    out.y.push_back(label);
    ++out.n;
  }
  out.validate();
  return out;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  for (std::size_t j = 0; j < data.d; ++j) out << "f" << j << ",";
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.x[i * data.d + j]);
      out << buf << ",";
    }
    out << (data.y[i] > 0 ? "1" : "-1") << "\n";
  }
  if (!out) throw std::runtime_error("csv: write failure on '" + path + "'");
}

void write_manifest(const DatasetManifest& m, const std::string& dataset_path) {
  nlohmann::json j;
  j["generator"] = m.generator;
  j["seed"] = m.seed;
  j["n"] = m.n;
  j["d"] = m.d;
  if (m.contamination) {
    const auto& c = *m.contamination;
    j["contamination"] = {
        {"kind", c.kind == ContaminationKind::label_flip ? "label_flip" : "feature_t_noise"},
        {"epsilon", c.epsilon},
        {"t_df", c.t_df},
        {"mode", c.mode == FlipMode::subset ? "subset" : "bernoulli"},
        {"seed", c.seed},
    };
  } else {
    j["contamination"] = nullptr;
  }
  const std::string path = dataset_path + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

SplitResult split(const Dataset& data, const std::array<double, 3>& fractions,
                  std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");
  std::vector<std::size_t> perm(data.n);
  for (std::size_t i = 0; i < data.n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < data.n; ++i) {
    const std::size_t j = i + rng.below(data.n - i);
    std::swap(perm[i], perm[j]);
  }
  const std::size_t n1 =
      static_cast<std::size_t>(std::floor(fractions[0] * static_cast<double>(data.n)));
  const std::size_t n2 =
      static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(data.n)));
  SplitResult out;
  out.train = subset_rows(data, {perm.begin(), perm.begin() + n1});
  out.validation = subset_rows(data, {perm.begin() + n1, perm.begin() + n1 + n2});
  out.test = subset_rows(data, {perm.begin() + n1 + n2, perm.end()});
  return out;
}

Standardizer fit_standardizer(const Dataset& train) {
  if (train.n == 0) throw std::invalid_argument("fit_standardizer: empty dataset");
  Standardizer s;
  s.mean.assign(train.d, 0.0);
  s.scale.assign(train.d, 1.0);
  for (std::size_t j = 0; j < train.d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < train.n; ++i) m += train.x[i * train.d + j];
    m /= static_cast<double>(train.n);
    double var = 0.0;
    for (std::size_t i = 0; i < train.n; ++i) {
      const double dlt = train.x[i * train.d + j] - m;
      var += dlt * dlt;
    }
    var /= static_cast<double>(train.n);
    s.mean[j] = m;
    s.scale[j] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }
  return s;
}

void Standardizer::apply(Dataset& data) const {
  if (data.d != mean.size())
    throw std::invalid_argument("standardizer: dimension mismatch");
  for (std::size_t i = 0; i < data.n; ++i)
    for (std::size_t j = 0; j < data.d; ++j)
      data.x[i * data.d + j] = (data.x[i * data.d + j] - mean[j]) * scale[j];
}

}  // namespace archboost
