#pragma once

// Synthetic point-pattern data drawn from mixtures of Poisson RFSs with
// Gaussian feature densities, one Poisson RFS per cluster.

#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rfsclust/core.hpp"
#include "rfsclust/rfsmodel.hpp"
#include "rfsclust/rng.hpp"

namespace rfsclust {

struct GenComponent {
  double lambda = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct GenSpec {
  std::vector<GenComponent> components;
  std::size_t patterns_per_component = 100;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (components.empty()) throw Error(ErrorCode::InvalidConfig, "generator needs at least one component");
    if (patterns_per_component < 1) throw Error(ErrorCode::InvalidConfig, "patterns_per_component must be positive");
    const auto d = components.front().mean.size();
    for (const auto& c : components) {
      if (!(c.lambda > 0.0 && std::isfinite(c.lambda))) throw Error(ErrorCode::InvalidConfig, "lambda must be positive");
      if (c.mean.size() != d) throw Error(ErrorCode::DimensionMismatch, "components differ in dimension");
      GaussianFeature check(c.mean, c.covariance);  // throws unless SPD
    }
  }
};

// m ~ Poisson(lambda), then m iid draws from the feature Gaussian.
inline PointPattern sample_poisson_rfs(double lambda, const GaussianFeature& feature, Rng& rng) {
  const std::size_t m = rng.poisson(lambda);
  const std::size_t d = feature.dim();
  const Eigen::MatrixXd l = feature.cholesky().matrixL();
  std::vector<double> coords;
  coords.reserve(m * d);
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) z(static_cast<Eigen::Index>(k)) = rng.normal();
    const Eigen::VectorXd x = feature.mean() + l * z;
    coords.insert(coords.end(), x.data(), x.data() + d);
  }
  return PointPattern(d, std::move(coords));
}

// patterns_per_component draws per component with labels "0", "1", ...,
// shuffled by the seeded stream. Ids are "p<position>" after shuffling.
inline PatternDataset generate_dataset(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);
  struct Item {
    PointPattern pattern;
    std::size_t label;
  };
  std::vector<Item> items;
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    const auto& c = spec.components[k];
    const GaussianFeature feature(c.mean, c.covariance);
    for (std::size_t i = 0; i < spec.patterns_per_component; ++i)
      items.push_back({sample_poisson_rfs(c.lambda, feature, rng), k});
  }
  rng.shuffle(items);

  PatternDataset data;
  data.dim = static_cast<std::size_t>(spec.components.front().mean.size());
  data.labels.emplace();
  for (std::size_t n = 0; n < items.size(); ++n) {
    data.ids.push_back("p" + std::to_string(n));
    data.patterns.push_back(std::move(items[n].pattern));
    data.labels->push_back(std::to_string(items[n].label));
  }
  return data;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"separated", "card-only", "overlap"};
  return names;
}

// Reference 2-D configurations, 3 clusters x 100 patterns each:
//   separated  unit-variance features with means 8 or more sigma apart
//   card-only  one shared feature density; rates 5, 15 and 40
//   overlap    means 1.5 sigma apart and rates 8, 10, 12
inline GenSpec preset(const std::string& name, std::uint64_t seed, std::size_t patterns_per_component = 100) {
  auto comp = [](double lambda, double mx, double my) {
    GenComponent c;
    c.lambda = lambda;
    c.mean = Eigen::Vector2d(mx, my);
    c.covariance = Eigen::Matrix2d::Identity();
    return c;
  };
  GenSpec spec;
  spec.rng_seed = seed;
  spec.patterns_per_component = patterns_per_component;
  if (name == "separated")
    spec.components = {comp(8.0, 0.0, 0.0), comp(12.0, 8.0, 0.0), comp(16.0, 4.0, 7.0)};
  else if (name == "card-only")
    spec.components = {comp(5.0, 0.0, 0.0), comp(15.0, 0.0, 0.0), comp(40.0, 0.0, 0.0)};
  else if (name == "overlap")
    spec.components = {comp(8.0, 0.0, 0.0), comp(10.0, 1.5, 0.0), comp(12.0, 0.75, 1.3)};
  else
    throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
  return spec;
}

}  // namespace rfsclust
