#include "privproj/model_json.hpp"

#include <fstream>

#include <fmt/format.h>

#include "privproj/error.hpp"

namespace privproj {

using nlohmann::json;

json model_to_json(const ProjectionModel& model) {
  const auto& cfg = model.config;
  json w = json::array();
  for (std::size_t i = 0; i < model.w.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < model.w.cols(); ++c) row.push_back(model.w(i, c));
    w.push_back(std::move(row));
  }
  json j;
  j["method"] = std::string(to_string(cfg.method));
  j["k"] = cfg.k;
  j["rho"] = cfg.rho ? json(*cfg.rho) : json(nullptr);
  j["rho_prime"] = cfg.rho_prime ? json(*cfg.rho_prime) : json(nullptr);
  j["privacy_weights"] = cfg.privacy_weights;
  j["seed"] = cfg.seed;
  j["feature_mean"] = model.feature_mean;
  j["eigenvalues"] = model.eigenvalues;
  j["w"] = std::move(w);
  return j;
}

ProjectionModel model_from_json(const json& j) {
  try {
    ProjectionModel model;
    auto& cfg = model.config;
    cfg.method = parse_method(j.at("method").get<std::string>());
    cfg.k = j.at("k").get<std::size_t>();
    if (!j.at("rho").is_null()) cfg.rho = j.at("rho").get<double>();
    if (!j.at("rho_prime").is_null()) cfg.rho_prime = j.at("rho_prime").get<double>();
    cfg.privacy_weights = j.at("privacy_weights").get<std::vector<double>>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    model.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();

    const auto& w = j.at("w");
    const std::size_t m = w.size();
    if (m != model.feature_mean.size())
      fail(ErrorCode::DimensionMismatch,
           fmt::format("w has {} rows but feature_mean has {} entries", m, model.feature_mean.size()));
    model.w = Matrix(m, cfg.k);
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = w[i].get<std::vector<double>>();
      if (row.size() != cfg.k)
        fail(ErrorCode::DimensionMismatch, fmt::format("w row {} has {} entries, expected {}", i, row.size(), cfg.k));
      for (std::size_t c = 0; c < cfg.k; ++c) model.w(i, c) = row[c];
    }
    if (model.eigenvalues.size() != cfg.k)
      fail(ErrorCode::DimensionMismatch, "eigenvalue count differs from k");
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, fmt::format("malformed model JSON: {}", e.what()));
  }
}

void save_model(const ProjectionModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  out << model_to_json(model).dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, fmt::format("write to '{}' failed", path));
}

ProjectionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, fmt::format("'{}': {}", path, e.what()));
  }
  return model_from_json(j);
}

}  // namespace privproj
