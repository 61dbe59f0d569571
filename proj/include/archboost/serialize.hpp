#pragma once

#include <string>

#include <json.hpp>

#include "archboost/booster.hpp"

namespace archboost {

// Versioned model document. Doubles are emitted in shortest round-trip form,
// so save/load is lossless for 64-bit values.
nlohmann::json ensemble_to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

void save_ensemble(const Ensemble& ensemble, const std::string& path);
Ensemble load_ensemble(const std::string& path);

}  // namespace archboost
