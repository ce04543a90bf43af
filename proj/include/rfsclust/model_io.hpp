#pragma once

// JSON serialization of IidClusterMixture:
// {
//   "format": "rfsclust-iid-mixture", "format_version": 1,
//   "dim": d, "unit_hypervolume": U, "weights": [...],
//   "components": [
//     {"cardinality": {"family": "poisson", "lambda": 3.5},
//      "mean": [...], "covariance": [... d*d values, row-major ...]},
//     {"cardinality": {"family": "categorical", "probabilities": [...]}, ...}
//   ]
// }

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rfsclust/rfsmodel.hpp"

namespace rfsclust {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const IidClusterMixture& model) {
  model.validate();
  nlohmann::json j;
  j["format"] = "rfsclust-iid-mixture";
  j["format_version"] = kModelFormatVersion;
  j["dim"] = model.dim();
  j["unit_hypervolume"] = model.unit_hypervolume;
  j["weights"] = model.weights;
  j["components"] = nlohmann::json::array();
  for (const auto& c : model.components) {
    nlohmann::json jc;
    if (c.cardinality.is_poisson())
      jc["cardinality"] = {{"family", "poisson"}, {"lambda", c.cardinality.poisson().lambda}};
    else
      jc["cardinality"] = {{"family", "categorical"}, {"probabilities", c.cardinality.categorical().probabilities}};
    const auto& mu = c.feature.mean();
    const auto& cov = c.feature.covariance();
    jc["mean"] = std::vector<double>(mu.data(), mu.data() + mu.size());
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < cov.rows(); ++r)
      for (Eigen::Index col = 0; col < cov.cols(); ++col) flat.push_back(cov(r, col));
    jc["covariance"] = flat;
    j["components"].push_back(std::move(jc));
  }
  return j;
}

inline IidClusterMixture model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::ParseError, "unsupported model format_version");
    IidClusterMixture model;
    model.unit_hypervolume = j.at("unit_hypervolume").get<double>();
    model.weights = j.at("weights").get<std::vector<double>>();
    const auto dim = j.at("dim").get<std::size_t>();
    for (const auto& jc : j.at("components")) {
      const auto& jcard = jc.at("cardinality");
      const auto family = jcard.at("family").get<std::string>();
      CardinalityModel card;
      if (family == "poisson")
        card = PoissonCardinality{jcard.at("lambda").get<double>()};
      else if (family == "categorical")
        card = CategoricalCardinality{jcard.at("probabilities").get<std::vector<double>>()};
      else
        throw Error(ErrorCode::ParseError, "unknown cardinality family '" + family + "'");
      const auto mean = jc.at("mean").get<std::vector<double>>();
      const auto cov = jc.at("covariance").get<std::vector<double>>();
      if (mean.size() != dim || cov.size() != dim * dim)
        throw Error(ErrorCode::ParseError, "component shape does not match dim");
      Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(dim));
      Eigen::MatrixXd sigma(dim, dim);
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) sigma(r, c) = cov[r * dim + c];
      model.components.push_back({card, GaussianFeature(std::move(mu), std::move(sigma))});
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model: ") + e.what());
  }
}

inline void write_model(const IidClusterMixture& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << model_to_json(model).dump(2) << '\n';
}

inline IidClusterMixture read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace rfsclust
