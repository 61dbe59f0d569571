#include "archboost/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace archboost {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json tree_to_json(const RegionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes)
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right}});
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& l : tree.leaves)
    leaves.push_back({{"p", l.p},
                      {"clamped_p", l.clamped_p},
                      {"h", l.h_value},
                      {"weight", l.total_weight}});
  return {{"nodes", nodes}, {"leaves", leaves}};
}

RegionTree tree_from_json(const nlohmann::json& j) {
  RegionTree tree;
  for (const auto& n : j.at("nodes"))
    tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                          n.at("left").get<int>(), n.at("right").get<int>()});
  int id = 0;
  for (const auto& l : j.at("leaves")) {
    Region r;
    r.id = id++;
    r.p = l.at("p").get<double>();
    r.clamped_p = l.at("clamped_p").get<double>();
    r.h_value = l.at("h").get<double>();
    r.total_weight = l.at("weight").get<double>();
    tree.leaves.push_back(r);
  }
  if (tree.leaves.empty()) throw std::runtime_error("model: tree without leaves");
  return tree;
}

}  // namespace

nlohmann::json ensemble_to_json(const Ensemble& ensemble) {
  nlohmann::json j;
  j["format"] = "archboost-ensemble";
  j["version"] = kFormatVersion;
  j["loss"] = ensemble.loss_id;
  j["dim"] = ensemble.dim;
  j["alphas"] = ensemble.alphas;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : ensemble.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != "archboost-ensemble")
    throw std::runtime_error("model: unrecognized document format");
  if (j.at("version").get<int>() != kFormatVersion)
    throw std::runtime_error("model: unsupported format version");
  Ensemble e;
  e.loss_id = j.at("loss").get<std::string>();
  e.loss = make_loss(e.loss_id);
  e.dim = j.at("dim").get<std::size_t>();
  e.alphas = j.at("alphas").get<std::vector<double>>();
  for (const auto& t : j.at("trees")) e.trees.push_back(tree_from_json(t));
  if (e.trees.size() != e.alphas.size())
    throw std::runtime_error("model: trees/alphas length mismatch");
  e.trace.n = 0;
  return e;
}

void save_ensemble(const Ensemble& ensemble, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("model: cannot write '" + path + "'");
  out << ensemble_to_json(ensemble).dump(2) << "\n";
  if (!out) throw std::runtime_error("model: write failure on '" + path + "'");
}

Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return ensemble_from_json(j);
}

}  // namespace archboost
