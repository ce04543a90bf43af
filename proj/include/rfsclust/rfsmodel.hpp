#pragma once

// Densities of iid-cluster random finite sets and their finite mixtures,
// all in the log domain. Densities are taken with respect to the reference
// measure built from the unit of hyper-volume U, so a pattern of m points
// picks up a factor U^m.

#include <cmath>
#include <limits>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rfsclust/core.hpp"

namespace rfsclust {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct CategoricalCardinality {
  // probabilities[m] = Pr(|X| = m), m = 0..N_card.
  std::vector<double> probabilities;
};

struct PoissonCardinality {
  double lambda = 1.0;
};

class CardinalityModel {
 public:
  CardinalityModel() : model_(PoissonCardinality{}) {}
  CardinalityModel(CategoricalCardinality c) : model_(std::move(c)) { validate(); }
  CardinalityModel(PoissonCardinality p) : model_(p) { validate(); }

  bool is_poisson() const noexcept { return std::holds_alternative<PoissonCardinality>(model_); }
  bool is_categorical() const noexcept { return !is_poisson(); }
  const PoissonCardinality& poisson() const { return std::get<PoissonCardinality>(model_); }
  const CategoricalCardinality& categorical() const { return std::get<CategoricalCardinality>(model_); }

  double log_pmf(std::size_t m) const {
    if (is_poisson()) {
      const double lambda = poisson().lambda;
      return static_cast<double>(m) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(m) + 1.0);
    }
    const auto& q = categorical().probabilities;
    if (m >= q.size() || q[m] <= 0.0) return kNegInf;
    return std::log(q[m]);
  }

  void validate() const {
    if (is_poisson()) {
      const double lambda = poisson().lambda;
      if (!(lambda > 0.0 && std::isfinite(lambda)))
        throw Error(ErrorCode::InvalidModel, "Poisson rate must be positive and finite");
      return;
    }
    const auto& q = categorical().probabilities;
    if (q.empty()) throw Error(ErrorCode::InvalidModel, "categorical cardinality has no support");
    double total = 0.0;
    for (double v : q) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidModel, "cardinality probability outside [0, 1]");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidModel, "cardinality probabilities do not sum to 1");
  }

  friend bool operator==(const CardinalityModel& a, const CardinalityModel& b) {
    if (a.is_poisson() != b.is_poisson()) return false;
    if (a.is_poisson()) return a.poisson().lambda == b.poisson().lambda;
    return a.categorical().probabilities == b.categorical().probabilities;
  }

 private:
  std::variant<PoissonCardinality, CategoricalCardinality> model_;
};

// Diagonal loading applied to every fitted covariance: 1e-9 of the mean
// variance, never below an absolute floor so zero scatter stays factorable.
inline constexpr double kCovarianceRelativeLoad = 1e-9;
inline constexpr double kCovarianceAbsoluteLoad = 1e-12;

inline Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& cov) {
  const auto d = cov.rows();
  const double eps = std::max(kCovarianceRelativeLoad * cov.trace() / static_cast<double>(d), kCovarianceAbsoluteLoad);
  Eigen::MatrixXd out = 0.5 * (cov + cov.transpose());
  out.diagonal().array() += eps;
  return out;
}

// Multivariate normal feature density, evaluated through a Cholesky factor.
class GaussianFeature {
 public:
  GaussianFeature() = default;
  GaussianFeature(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
      : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = mean_.size();
    if (d == 0) throw Error(ErrorCode::InvalidModel, "zero-dimensional Gaussian");
    if (covariance_.rows() != d || covariance_.cols() != d)
      throw Error(ErrorCode::DimensionMismatch, "covariance shape does not match the mean");
    if (!mean_.allFinite() || !covariance_.allFinite())
      throw Error(ErrorCode::InvalidModel, "non-finite Gaussian parameters");
    if (!covariance_.isApprox(covariance_.transpose(), 1e-12))
      throw Error(ErrorCode::InvalidModel, "covariance is not symmetric");
    chol_.compute(covariance_);
    if (chol_.info() != Eigen::Success) throw Error(ErrorCode::InvalidModel, "covariance is not positive definite");
    const auto& l = chol_.matrixLLT();
    log_det_ = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!(l(i, i) > 0.0)) throw Error(ErrorCode::InvalidModel, "covariance is not positive definite");
      log_det_ += 2.0 * std::log(l(i, i));
    }
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const noexcept { return chol_; }

  double log_density(std::span<const double> x) const {
    const auto d = mean_.size();
    Eigen::Map<const Eigen::VectorXd> point(x.data(), d);
    Eigen::VectorXd z = point - mean_;
    chol_.matrixL().solveInPlace(z);
    return -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det_ + z.squaredNorm());
  }

  friend bool operator==(const GaussianFeature& a, const GaussianFeature& b) {
    return a.mean_ == b.mean_ && a.covariance_ == b.covariance_;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double log_det_ = 0.0;
};

struct IidClusterComponent {
  CardinalityModel cardinality;
  GaussianFeature feature;

  friend bool operator==(const IidClusterComponent&, const IidClusterComponent&) = default;
};

struct IidClusterMixture {
  std::vector<double> weights;
  std::vector<IidClusterComponent> components;
  double unit_hypervolume = 1.0;

  std::size_t size() const noexcept { return components.size(); }
  std::size_t dim() const { return components.empty() ? 0 : components.front().feature.dim(); }

  void validate() const {
    if (components.empty()) throw Error(ErrorCode::InvalidModel, "mixture needs at least one component");
    if (weights.size() != components.size())
      throw Error(ErrorCode::InvalidModel, "weight count differs from component count");
    if (!(unit_hypervolume > 0.0 && std::isfinite(unit_hypervolume)))
      throw Error(ErrorCode::InvalidModel, "unit hyper-volume must be positive");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::InvalidModel, "weight outside [0, 1]");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidModel, "weights do not sum to 1");
    for (const auto& c : components) {
      c.cardinality.validate();
      if (c.feature.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "components differ in dimension");
    }
  }

  friend bool operator==(const IidClusterMixture&, const IidClusterMixture&) = default;
};

namespace detail {

inline void require_dim(const PointPattern& x, const GaussianFeature& f) {
  if (!x.empty() && x.dim() != f.dim())
    throw Error(ErrorCode::DimensionMismatch, "pattern of dimension " + std::to_string(x.dim()) +
                                                  " against a " + std::to_string(f.dim()) + "-dimensional model");
}

inline double sum_log_feature(const PointPattern& x, const GaussianFeature& f) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += f.log_density(x.point(i));
  return total;
}

}  // namespace detail

// log[ lambda^m e^-lambda prod_x U p_f(x) ].
inline double log_poisson_rfs_density(const PointPattern& x, double lambda, const GaussianFeature& feature,
                                      double unit_hypervolume = 1.0) {
  detail::require_dim(x, feature);
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidModel, "Poisson rate must be positive");
  const double m = static_cast<double>(x.size());
  return m * std::log(lambda) - lambda + m * std::log(unit_hypervolume) + detail::sum_log_feature(x, feature);
}

// log[ p_c(m) m! prod_x U p_f(x) ]; an empty pattern contributes log p_c(0).
inline double log_iid_cluster_density(const PointPattern& x, const IidClusterComponent& comp,
                                      double unit_hypervolume = 1.0) {
  detail::require_dim(x, comp.feature);
  if (comp.cardinality.is_poisson())
    return log_poisson_rfs_density(x, comp.cardinality.poisson().lambda, comp.feature, unit_hypervolume);
  const std::size_t m = x.size();
  const double card = comp.cardinality.log_pmf(m);
  if (card == kNegInf) return kNegInf;
  const double md = static_cast<double>(m);
  return card + std::lgamma(md + 1.0) + md * std::log(unit_hypervolume) + detail::sum_log_feature(x, comp.feature);
}

inline double log_sum_exp(std::span<const double> terms) {
  double top = kNegInf;
  for (double t : terms) top = std::max(top, t);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// log w_k + log p(X | component k), one entry per component.
inline std::vector<double> log_joint_over_components(const PointPattern& x, const IidClusterMixture& model) {
  std::vector<double> joint(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double w = model.weights[k];
    joint[k] = (w > 0.0) ? std::log(w) + log_iid_cluster_density(x, model.components[k], model.unit_hypervolume)
                         : kNegInf;
  }
  return joint;
}

inline double log_mixture_density(const PointPattern& x, const IidClusterMixture& model) {
  const auto joint = log_joint_over_components(x, model);
  return log_sum_exp(joint);
}

// log p(k | X, model); exponentiates to a probability vector.
inline std::vector<double> log_posterior_over_components(const PointPattern& x, const IidClusterMixture& model) {
  auto joint = log_joint_over_components(x, model);
  const double total = log_sum_exp(joint);
  if (total == kNegInf) throw Error(ErrorCode::ZeroDensity, "pattern has zero density under every component");
  for (double& v : joint) v -= total;
  return joint;
}

}  // namespace rfsclust
