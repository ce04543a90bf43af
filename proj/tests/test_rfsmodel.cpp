#include <gtest/gtest.h>

#include <Eigen/LU>
#include <numbers>

#include "rfsclust/model_io.hpp"
#include "rfsclust/rfsmodel.hpp"
#include "rfsclust/rng.hpp"

using namespace rfsclust;

namespace {

GaussianFeature standard_normal_2d() { return GaussianFeature(Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()); }

GaussianFeature random_feature(Rng& rng, int d) {
  Eigen::VectorXd mean(d);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    mean(i) = 4.0 * rng.normal();
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  return GaussianFeature(mean, 0.5 * (cov + cov.transpose()));
}

PointPattern random_pattern(Rng& rng, std::size_t m, int d, double scale = 3.0) {
  std::vector<double> coords(m * d);
  for (auto& v : coords) v = scale * rng.normal();
  return PointPattern(d, coords);
}

// Direct normal density without a factorization, as an independent check.
double normal_pdf(std::span<const double> x, const GaussianFeature& f) {
  const auto d = static_cast<Eigen::Index>(f.dim());
  Eigen::Map<const Eigen::VectorXd> p(x.data(), d);
  const Eigen::VectorXd z = p - f.mean();
  const double quad = z.dot(f.covariance().inverse() * z);
  return std::exp(-0.5 * quad) / std::sqrt(std::pow(2 * std::numbers::pi, static_cast<double>(d)) * f.covariance().determinant());
}

}  // namespace

TEST(GaussianFeature, StandardNormalAtOrigin) {
  const auto f = standard_normal_2d();
  const std::vector<double> x{0, 0};
  EXPECT_NEAR(f.log_density(x), -std::log(2 * std::numbers::pi), 1e-14);
}

TEST(GaussianFeature, MatchesDirectFormula) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + static_cast<int>(rng.below(4));
    const auto f = random_feature(rng, d);
    const auto x = random_pattern(rng, 1, d);
    EXPECT_NEAR(std::exp(f.log_density(x.point(0))), normal_pdf(x.point(0), f), 1e-12);
  }
}

TEST(GaussianFeature, RejectsIndefiniteCovariance) {
  Eigen::Matrix2d c;
  c << 1, 2, 2, 1;
  EXPECT_THROW(GaussianFeature(Eigen::Vector2d(0, 0), c), Error);
}

TEST(IidClusterDensity, EmptyPatternGivesLogQ0) {
  const IidClusterComponent comp{CategoricalCardinality{{0.3, 0.5, 0.2}}, standard_normal_2d()};
  EXPECT_NEAR(log_iid_cluster_density(PointPattern::empty(2), comp), std::log(0.3), 1e-15);
}

TEST(IidClusterDensity, SingletonGivesLogQ1PlusFeature) {
  const IidClusterComponent comp{CategoricalCardinality{{0.3, 0.5, 0.2}}, standard_normal_2d()};
  const auto x = PointPattern::from_rows({{0.5, -1.0}});
  EXPECT_NEAR(log_iid_cluster_density(x, comp), std::log(0.5) + comp.feature.log_density(x.point(0)), 1e-14);
}

TEST(IidClusterDensity, ZeroCardinalityMassIsMinusInfinity) {
  const IidClusterComponent comp{CategoricalCardinality{{0.5, 0.5, 0, 0}}, standard_normal_2d()};
  EXPECT_EQ(log_iid_cluster_density(PointPattern::from_rows({{0, 0}, {1, 1}, {2, 2}}), comp), kNegInf);
  // Beyond the support as well.
  EXPECT_EQ(log_iid_cluster_density(PointPattern::from_rows({{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}), comp), kNegInf);
}

TEST(IidClusterDensity, TwoPointsIncludeFactorial) {
  const IidClusterComponent comp{CategoricalCardinality{{0.3, 0.3, 0.4}}, standard_normal_2d()};
  const auto x = PointPattern::from_rows({{0, 0}, {1, 0}});
  const double direct = 0.4 * 2.0 * normal_pdf(x.point(0), comp.feature) * normal_pdf(x.point(1), comp.feature);
  EXPECT_NEAR(log_iid_cluster_density(x, comp), std::log(direct), 1e-12);
}

TEST(IidClusterDensity, DimensionMismatch) {
  const IidClusterComponent comp{PoissonCardinality{2.0}, standard_normal_2d()};
  try {
    log_iid_cluster_density(PointPattern::from_rows({{0, 0, 0}}), comp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(PoissonDensity, EmptyAndSingleton) {
  const auto f = standard_normal_2d();
  EXPECT_DOUBLE_EQ(log_poisson_rfs_density(PointPattern::empty(2), 3.5, f), -3.5);
  const auto x = PointPattern::from_rows({{1, 2}});
  EXPECT_NEAR(log_poisson_rfs_density(x, 3.5, f), std::log(3.5) - 3.5 + f.log_density(x.point(0)), 1e-14);
}

TEST(PoissonDensity, EqualsTruncatedCategorical) {
  Rng rng(2);
  const std::size_t n_card = 80;
  for (int t = 0; t < 100; ++t) {
    const double lambda = (t == 0) ? 5.0 : 0.5 + 20.0 * rng.uniform();
    std::vector<double> q(n_card + 1);
    for (std::size_t m = 0; m <= n_card; ++m)
      q[m] = std::exp(static_cast<double>(m) * std::log(lambda) - lambda - std::lgamma(m + 1.0));
    // Truncation mass beyond 80 is far below 1e-12 for these rates.
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& v : q) v /= total;
    const auto f = random_feature(rng, 2);
    const IidClusterComponent cat{CategoricalCardinality{q}, f};
    const auto x = random_pattern(rng, rng.below(30), 2);
    EXPECT_NEAR(log_iid_cluster_density(x, cat), log_poisson_rfs_density(x, lambda, f), 1e-9);
  }
}

TEST(Density, InvariantToPointOrder) {
  Rng rng(3);
  const IidClusterComponent comp{PoissonCardinality{4.0}, random_feature(rng, 3)};
  const auto x = random_pattern(rng, 6, 3);
  auto rows = x.rows();
  std::reverse(rows.begin(), rows.end());
  std::swap(rows[1], rows[4]);
  const auto y = PointPattern::from_rows(rows);
  EXPECT_NEAR(log_iid_cluster_density(x, comp), log_iid_cluster_density(y, comp), 1e-12);
}

TEST(Density, UnitHypervolumeScaling) {
  Rng rng(4);
  const IidClusterComponent pois{PoissonCardinality{4.0}, random_feature(rng, 2)};
  const IidClusterComponent cat{CategoricalCardinality{{0.1, 0.2, 0.3, 0.2, 0.1, 0.1}}, random_feature(rng, 2)};
  for (std::size_t m = 0; m <= 5; ++m) {
    const auto x = random_pattern(rng, m, 2);
    const double s = 7.25;
    EXPECT_NEAR(log_iid_cluster_density(x, pois, 2.0 * s) - log_iid_cluster_density(x, pois, 2.0),
                static_cast<double>(m) * std::log(s), 1e-12);
    EXPECT_NEAR(log_iid_cluster_density(x, cat, s) - log_iid_cluster_density(x, cat, 1.0),
                static_cast<double>(m) * std::log(s), 1e-12);
  }
}

TEST(Mixture, SingleComponentEqualsComponent) {
  Rng rng(5);
  const IidClusterComponent comp{PoissonCardinality{3.0}, random_feature(rng, 2)};
  const IidClusterMixture model{{1.0}, {comp}, 1.0};
  const auto x = random_pattern(rng, 4, 2);
  EXPECT_DOUBLE_EQ(log_mixture_density(x, model), log_iid_cluster_density(x, comp));
}

TEST(Mixture, IdenticalComponentsEqualEither) {
  Rng rng(6);
  const IidClusterComponent comp{PoissonCardinality{3.0}, random_feature(rng, 2)};
  const IidClusterMixture model{{0.5, 0.5}, {comp, comp}, 1.0};
  const auto x = random_pattern(rng, 3, 2);
  EXPECT_NEAR(log_mixture_density(x, model), log_iid_cluster_density(x, comp), 1e-12);
  const auto post = log_posterior_over_components(x, model);
  EXPECT_NEAR(std::exp(post[0]), 0.5, 1e-12);
  EXPECT_NEAR(std::exp(post[1]), 0.5, 1e-12);
}

TEST(Mixture, MatchesDirectDomainSum) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    IidClusterMixture model;
    std::vector<double> w{rng.uniform() + 0.1, rng.uniform() + 0.1, rng.uniform() + 0.1};
    const double total = w[0] + w[1] + w[2];
    for (auto& v : w) v /= total;
    model.weights = w;
    model.components = {{PoissonCardinality{2.0}, random_feature(rng, 2)},
                        {CategoricalCardinality{{0.2, 0.3, 0.3, 0.2}}, random_feature(rng, 2)},
                        {PoissonCardinality{1.0}, random_feature(rng, 2)}};
    const auto x = random_pattern(rng, rng.below(4), 2, 1.5);
    double direct = 0.0;
    for (std::size_t k = 0; k < 3; ++k) direct += w[k] * std::exp(log_iid_cluster_density(x, model.components[k]));
    EXPECT_NEAR(log_mixture_density(x, model), std::log(direct), 1e-10);
  }
}

TEST(Posterior, DegenerateWeight) {
  Rng rng(8);
  const IidClusterMixture model{{1.0, 0.0},
                                {{PoissonCardinality{3.0}, random_feature(rng, 2)},
                                 {PoissonCardinality{3.0}, random_feature(rng, 2)}},
                                1.0};
  const auto post = log_posterior_over_components(random_pattern(rng, 2, 2), model);
  EXPECT_EQ(std::exp(post[0]), 1.0);
  EXPECT_EQ(std::exp(post[1]), 0.0);
}

TEST(Posterior, HandComputedTwoComponentModel) {
  // Same unit-variance feature; cardinalities differ.
  const IidClusterMixture model{{0.25, 0.75},
                                {{PoissonCardinality{1.0}, standard_normal_2d()},
                                 {PoissonCardinality{4.0}, standard_normal_2d()}},
                                1.0};
  const auto x = PointPattern::from_rows({{0, 0}, {1, 1}});
  // Feature terms cancel: joint_k proportional to w_k lambda_k^2 e^{-lambda_k}.
  const double a = 0.25 * 1.0 * std::exp(-1.0), b = 0.75 * 16.0 * std::exp(-4.0);
  const auto post = log_posterior_over_components(x, model);
  EXPECT_NEAR(std::exp(post[0]), a / (a + b), 1e-14);
  EXPECT_NEAR(std::exp(post[1]), b / (a + b), 1e-14);
}

TEST(Posterior, RowStochasticAndUnitInvariant) {
  Rng rng(9);
  IidClusterMixture model{{0.2, 0.3, 0.5},
                          {{PoissonCardinality{2.0}, random_feature(rng, 2)},
                           {PoissonCardinality{9.0}, random_feature(rng, 2)},
                           {CategoricalCardinality{std::vector<double>(41, 1.0 / 41)}, random_feature(rng, 2)}},
                          1.0};
  for (int t = 0; t < 50; ++t) {
    const auto x = random_pattern(rng, rng.below(40), 2, 6.0);
    model.unit_hypervolume = 1.0;
    const auto p1 = log_posterior_over_components(x, model);
    model.unit_hypervolume = 123.0;
    const auto p2 = log_posterior_over_components(x, model);
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      total += std::exp(p1[k]);
      EXPECT_NEAR(std::exp(p1[k]), std::exp(p2[k]), 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Posterior, ImpossiblePatternIsZeroDensity) {
  const IidClusterMixture model{{1.0}, {{CategoricalCardinality{{1.0}}, standard_normal_2d()}}, 1.0};
  try {
    log_posterior_over_components(PointPattern::from_rows({{0, 0}}), model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDensity);
  }
}

TEST(LogSumExp, NoOverflowOrUnderflow) {
  const std::vector<double> big{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> small{-1000.0, kNegInf};
  EXPECT_DOUBLE_EQ(log_sum_exp(small), -1000.0);
  const std::vector<double> none{kNegInf, kNegInf};
  EXPECT_EQ(log_sum_exp(none), kNegInf);
}

TEST(CardinalityModel, Validation) {
  EXPECT_THROW(CardinalityModel(CategoricalCardinality{{0.5, 0.4}}), Error);
  EXPECT_THROW(CardinalityModel(PoissonCardinality{0.0}), Error);
  EXPECT_NO_THROW(CardinalityModel(CategoricalCardinality{{0.5, 0.5}}));
  IidClusterMixture m{{0.6, 0.3}, {{PoissonCardinality{1}, standard_normal_2d()}, {PoissonCardinality{1}, standard_normal_2d()}}, 1.0};
  EXPECT_THROW(m.validate(), Error);
}

TEST(Regularization, ZeroScatterBecomesSmallIdentity) {
  const Eigen::MatrixXd r = regularize_covariance(Eigen::MatrixXd::Zero(3, 3));
  EXPECT_TRUE(r.isApprox(kCovarianceAbsoluteLoad * Eigen::MatrixXd::Identity(3, 3)));
  Eigen::Matrix2d c;
  c << 2, 0, 0, 4;
  const Eigen::MatrixXd r2 = regularize_covariance(c);
  EXPECT_DOUBLE_EQ(r2(0, 0), 2 + 3e-9);
  EXPECT_DOUBLE_EQ(r2(1, 1), 4 + 3e-9);
}

TEST(ModelIo, RoundTripIsExact) {
  Rng rng(10);
  IidClusterMixture model{{1.0 / 3.0, 2.0 / 3.0},
                          {{PoissonCardinality{std::numbers::pi}, random_feature(rng, 3)},
                           {CategoricalCardinality{{0.1, 0.7, 0.2}}, random_feature(rng, 3)}},
                          0.37};
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
  EXPECT_EQ(back, model);
  auto j = model_to_json(model);
  EXPECT_EQ(j.at("format_version"), kModelFormatVersion);
  j["format_version"] = 99;
  EXPECT_THROW(model_from_json(j), Error);
}
