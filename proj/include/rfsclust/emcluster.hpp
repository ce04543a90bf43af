#pragma once

// EM fitting of a mixture of iid-cluster RFSs (Gaussian features, categorical
// or Poisson cardinality) and MAP cluster assignment.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rfsclust/core.hpp"
#include "rfsclust/matrix.hpp"
#include "rfsclust/rfsmodel.hpp"
#include "rfsclust/rng.hpp"

namespace rfsclust {

enum class CardinalityFamily { Categorical, Poisson };

inline std::string to_string(CardinalityFamily f) {
  return f == CardinalityFamily::Poisson ? "poisson" : "categorical";
}

inline CardinalityFamily parse_cardinality_family(const std::string& name) {
  if (name == "poisson") return CardinalityFamily::Poisson;
  if (name == "categorical") return CardinalityFamily::Categorical;
  throw Error(ErrorCode::InvalidConfig, "unknown cardinality family '" + name + "'");
}

inline constexpr double kCardinalityFloor = 1e-12;
inline constexpr double kPoissonRateFloor = 1e-6;

struct EmConfig {
  std::size_t n_components = 2;
  std::size_t n_iterations = 100;
  CardinalityFamily cardinality_family = CardinalityFamily::Poisson;
  // Only "kmeans++" is defined.
  std::string init = "kmeans++";
  double min_weight = 1e-6;
  std::uint64_t rng_seed = 0;
  // Upper end of categorical support; the largest training cardinality is
  // used when this is smaller.
  std::size_t n_card = 0;
  // Stop early once the log-likelihood gains less than `tolerance` for
  // `patience` consecutive iterations.
  double tolerance = 1e-8;
  std::size_t patience = 3;
  // Weight each pattern's scatter by |X_n| in the covariance update (the
  // double-sum form). Off by default; kept for comparison only.
  bool literal_double_sum_covariance = false;
  bool keep_snapshots = false;

  void validate() const {
    if (n_components < 1) throw Error(ErrorCode::InvalidConfig, "n_components must be at least 1");
    if (n_iterations < 1) throw Error(ErrorCode::InvalidConfig, "n_iterations must be at least 1");
    if (!(min_weight >= 0.0 && min_weight < 1.0 / static_cast<double>(n_components)))
      throw Error(ErrorCode::InvalidConfig, "min_weight must lie in [0, 1/K)");
    if (init != "kmeans++") throw Error(ErrorCode::InvalidConfig, "unknown init strategy '" + init + "'");
    if (!(tolerance >= 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerance must be nonnegative");
  }
};

struct EmTrace {
  // Dataset log-likelihood after each iteration's M-step.
  std::vector<double> log_likelihood;
  double initial_log_likelihood = 0.0;
  std::vector<IidClusterMixture> snapshots;
};

struct EmFit {
  IidClusterMixture model;
  EmTrace trace;
};

struct EStepResult {
  Matrix responsibilities;  // N x K
  double log_likelihood = 0.0;
};

inline EStepResult e_step_with_likelihood(const PatternDataset& data, const IidClusterMixture& model) {
  const std::size_t n = data.size();
  const std::size_t k = model.size();
  EStepResult out{Matrix(n, k), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    auto joint = log_joint_over_components(data.patterns[i], model);
    const double total = log_sum_exp(joint);
    if (total == kNegInf)
      throw Error(ErrorCode::ZeroDensity, "pattern " + std::to_string(i) + " has zero density under every component");
    for (std::size_t c = 0; c < k; ++c) out.responsibilities(i, c) = std::exp(joint[c] - total);
    out.log_likelihood += total;
  }
  return out;
}

// Posterior component probabilities, one row per pattern.
inline Matrix e_step(const PatternDataset& data, const IidClusterMixture& model) {
  return e_step_with_likelihood(data, model).responsibilities;
}

inline double dataset_log_likelihood(const PatternDataset& data, const IidClusterMixture& model) {
  double total = 0.0;
  for (const auto& x : data.patterns) total += log_mixture_density(x, model);
  return total;
}

// Mean responsibility per component, floored at `min_weight` and renormalized.
inline std::vector<double> m_step_weights(const Matrix& resp, double min_weight = 0.0) {
  const std::size_t n = resp.rows();
  const std::size_t k = resp.cols();
  if (n == 0 || k == 0) throw Error(ErrorCode::InvalidConfig, "empty responsibility matrix");
  std::vector<double> w(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) w[c] += resp(i, c);
  for (double& v : w) v = std::max(v / static_cast<double>(n), min_weight);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

// q_m proportional to the responsibility mass of patterns with m points,
// m = 0..n_card. Zero bins are raised to `floor` before renormalizing.
inline CategoricalCardinality m_step_cardinality_categorical(const PatternDataset& data, const Matrix& resp,
                                                             std::size_t k, std::size_t n_card,
                                                             double floor = kCardinalityFloor) {
  std::vector<double> q(n_card + 1, 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t m = data.patterns[i].size();
    if (m > n_card)
      throw Error(ErrorCode::InvalidConfig, "pattern " + std::to_string(i) + " exceeds the cardinality support");
    q[m] += resp(i, k);
    mass += resp(i, k);
  }
  if (!(mass > 0.0))
    throw Error(ErrorCode::DegenerateComponent, "component " + std::to_string(k) + " has no responsibility mass");
  for (double& v : q) v /= mass;
  if (floor > 0.0) {
    for (double& v : q) v = std::max(v, floor);
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    for (double& v : q) v /= total;
  }
  return {std::move(q)};
}

// Responsibility-weighted mean cardinality, floored at 1e-6.
inline PoissonCardinality m_step_cardinality_poisson(const PatternDataset& data, const Matrix& resp, std::size_t k) {
  double mass = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    mass += resp(i, k);
    weighted += resp(i, k) * static_cast<double>(data.patterns[i].size());
  }
  if (!(mass > 0.0))
    throw Error(ErrorCode::DegenerateComponent, "component " + std::to_string(k) + " has no responsibility mass");
  return {std::max(weighted / mass, kPoissonRateFloor)};
}

// Responsibility-weighted pooled mean and scatter of the points, then
// diagonal loading.
inline GaussianFeature m_step_gaussian(const PatternDataset& data, const Matrix& resp, std::size_t k,
                                       bool literal_double_sum = false) {
  const auto d = static_cast<Eigen::Index>(data.dim);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  double mass = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.patterns[i];
    if (x.empty()) continue;
    Eigen::Map<const Eigen::MatrixXd> pts(x.coords().data(), d, static_cast<Eigen::Index>(x.size()));
    sum += resp(i, k) * pts.rowwise().sum();
    mass += resp(i, k) * static_cast<double>(x.size());
  }
  if (!(mass > 0.0))
    throw Error(ErrorCode::DegenerateComponent, "component " + std::to_string(k) + " has zero effective point mass");
  Eigen::VectorXd mean = sum / mass;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.patterns[i];
    if (x.empty() || resp(i, k) == 0.0) continue;
    Eigen::Map<const Eigen::MatrixXd> pts(x.coords().data(), d, static_cast<Eigen::Index>(x.size()));
    const Eigen::MatrixXd centered = pts.colwise() - mean;
    double w = resp(i, k);
    if (literal_double_sum) w *= static_cast<double>(x.size());
    scatter.noalias() += w * centered * centered.transpose();
  }
  return GaussianFeature(std::move(mean), regularize_covariance(scatter / mass));
}

namespace detail {

inline Eigen::VectorXd pattern_mean(const PointPattern& x) {
  const auto d = static_cast<Eigen::Index>(x.dim());
  Eigen::Map<const Eigen::MatrixXd> pts(x.coords().data(), d, static_cast<Eigen::Index>(x.size()));
  return pts.rowwise().mean();
}

// Lexicographic order on (mean, cardinality, coordinates), so that the
// seeded draws below do not depend on dataset order.
inline std::vector<std::size_t> canonical_order(const PatternDataset& data, const std::vector<Eigen::VectorXd>& means,
                                                const std::vector<std::size_t>& candidates) {
  auto order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ma = means[a];
    const auto& mb = means[b];
    for (Eigen::Index j = 0; j < ma.size(); ++j)
      if (ma(j) != mb(j)) return ma(j) < mb(j);
    const auto& xa = data.patterns[a];
    const auto& xb = data.patterns[b];
    if (xa.size() != xb.size()) return xa.size() < xb.size();
    return std::lexicographical_compare(xa.coords().begin(), xa.coords().end(), xb.coords().begin(),
                                        xb.coords().end());
  });
  return order;
}

}  // namespace detail

inline std::size_t max_cardinality(const PatternDataset& data) {
  std::size_t m = 0;
  for (const auto& x : data.patterns) m = std::max(m, x.size());
  return m;
}

// Uniform weights; k-means++ seeding of the means over per-pattern feature
// means; pooled point covariance for every component; add-one smoothed
// cardinality histogram or the mean cardinality jittered by up to 10%.
inline IidClusterMixture initialize_em(const PatternDataset& data, const EmConfig& config) {
  const std::size_t k = config.n_components;
  const auto d = static_cast<Eigen::Index>(data.dim);
  Rng rng(config.rng_seed);

  std::vector<Eigen::VectorXd> means(data.size());
  std::vector<std::size_t> candidates;
  Eigen::VectorXd pooled_sum = Eigen::VectorXd::Zero(d);
  std::size_t total_points = 0;
  double total_card = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.patterns[i];
    total_card += static_cast<double>(x.size());
    if (x.empty()) continue;
    means[i] = detail::pattern_mean(x);
    candidates.push_back(i);
    Eigen::Map<const Eigen::MatrixXd> pts(x.coords().data(), d, static_cast<Eigen::Index>(x.size()));
    pooled_sum += pts.rowwise().sum();
    total_points += x.size();
  }
  if (candidates.empty()) throw Error(ErrorCode::InitFailure, "every pattern is empty; no feature data to fit");

  const Eigen::VectorXd pooled_mean = pooled_sum / static_cast<double>(total_points);
  Eigen::MatrixXd pooled_cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i : candidates) {
    const auto& x = data.patterns[i];
    Eigen::Map<const Eigen::MatrixXd> pts(x.coords().data(), d, static_cast<Eigen::Index>(x.size()));
    const Eigen::MatrixXd centered = pts.colwise() - pooled_mean;
    pooled_cov.noalias() += centered * centered.transpose();
  }
  pooled_cov = regularize_covariance(pooled_cov / static_cast<double>(total_points));

  const auto order = detail::canonical_order(data, means, candidates);
  std::vector<Eigen::VectorXd> centers;
  centers.push_back(means[order[rng.below(order.size())]]);
  std::vector<double> nearest(order.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t c = 0; c < order.size(); ++c) {
      nearest[c] = std::min(nearest[c], (means[order[c]] - centers.back()).squaredNorm());
      total += nearest[c];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      pick = order.size() - 1;
      for (std::size_t c = 0; c < order.size(); ++c) {
        run += nearest[c];
        if (run > target && nearest[c] > 0.0) {
          pick = c;
          break;
        }
      }
    } else {
      pick = rng.below(order.size());
    }
    centers.push_back(means[order[pick]]);
  }

  const std::size_t n_card = std::max(config.n_card, max_cardinality(data));
  std::vector<double> histogram(n_card + 1, 1.0);
  for (const auto& x : data.patterns) histogram[x.size()] += 1.0;
  const double hist_total = std::accumulate(histogram.begin(), histogram.end(), 0.0);
  for (double& v : histogram) v /= hist_total;
  const double mean_card = total_card / static_cast<double>(data.size());

  IidClusterMixture model;
  model.weights.assign(k, 1.0 / static_cast<double>(k));
  for (std::size_t c = 0; c < k; ++c) {
    CardinalityModel card;
    if (config.cardinality_family == CardinalityFamily::Poisson) {
      const double jitter = 1.0 + 0.1 * (2.0 * rng.uniform() - 1.0);
      card = PoissonCardinality{std::max(mean_card * jitter, kPoissonRateFloor)};
    } else {
      card = CategoricalCardinality{histogram};
    }
    model.components.push_back({card, GaussianFeature(centers[c], pooled_cov)});
  }
  model.validate();
  return model;
}

inline IidClusterMixture m_step(const PatternDataset& data, const Matrix& resp, const EmConfig& config,
                                std::size_t n_card, double unit_hypervolume) {
  IidClusterMixture next;
  next.unit_hypervolume = unit_hypervolume;
  next.weights = m_step_weights(resp, config.min_weight);
  for (std::size_t k = 0; k < resp.cols(); ++k) {
    CardinalityModel card;
    if (config.cardinality_family == CardinalityFamily::Poisson)
      card = m_step_cardinality_poisson(data, resp, k);
    else
      card = m_step_cardinality_categorical(data, resp, k, n_card);
    next.components.push_back({card, m_step_gaussian(data, resp, k, config.literal_double_sum_covariance)});
  }
  return next;
}

inline EmFit fit_em(const PatternDataset& data, const EmConfig& config, double unit_hypervolume = 1.0) {
  validate_dataset(data);
  config.validate();
  if (config.n_components > data.size())
    throw Error(ErrorCode::InvalidConfig, "more components than patterns");

  EmFit fit;
  fit.model = initialize_em(data, config);
  fit.model.unit_hypervolume = unit_hypervolume;
  const std::size_t n_card = std::max(config.n_card, max_cardinality(data));

  auto current = e_step_with_likelihood(data, fit.model);
  fit.trace.initial_log_likelihood = current.log_likelihood;
  double previous = current.log_likelihood;
  std::size_t flat = 0;
  for (std::size_t it = 1; it <= config.n_iterations; ++it) {
    try {
      fit.model = m_step(data, current.responsibilities, config, n_card, unit_hypervolume);
      current = e_step_with_likelihood(data, fit.model);
    } catch (const Error& e) {
      throw Error(e.code(), "iteration " + std::to_string(it) + ": " + e.what());
    }
    fit.trace.log_likelihood.push_back(current.log_likelihood);
    if (config.keep_snapshots) fit.trace.snapshots.push_back(fit.model);
    flat = (current.log_likelihood - previous < config.tolerance) ? flat + 1 : 0;
    previous = current.log_likelihood;
    if (flat >= config.patience) break;
  }
  return fit;
}

// Hard label = most probable component (lowest index on ties); memberships
// hold the full posterior.
inline ClusteringResult map_assign(const PatternDataset& data, const IidClusterMixture& model) {
  model.validate();
  const auto e = e_step_with_likelihood(data, model);
  ClusteringResult result;
  result.memberships.emplace();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = e.responsibilities.row(i);
    result.memberships->emplace_back(row.begin(), row.end());
    result.hard_labels.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  result.diagnostics["log_likelihood"] = e.log_likelihood;
  result.diagnostics["components"] = static_cast<double>(model.size());
  return result;
}

}  // namespace rfsclust
