#pragma once

#include <string>

#include <json.hpp>

#include "privproj/projections.hpp"

namespace privproj {

/// {method, k, rho, rho_prime, privacy_weights, seed, feature_mean,
///  eigenvalues, w}; w is row-major nested arrays (M rows of K values).
nlohmann::json model_to_json(const ProjectionModel& model);
ProjectionModel model_from_json(const nlohmann::json& j);

void save_model(const ProjectionModel& model, const std::string& path);
ProjectionModel load_model(const std::string& path);

}  // namespace privproj
