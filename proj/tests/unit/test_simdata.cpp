#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "bscca/error.hpp"
#include "bscca/model.hpp"
#include "bscca/simdata.hpp"
#include "oracles.hpp"

using namespace bscca;

TEST(PopulationCov, ToeplitzBlocks) {
  auto m = build_population_cov(20);
  ASSERT_EQ(m.px, 10);
  ASSERT_EQ(m.py, 10);
  Matrix sx = m.sigma.topLeftCorner(10, 10);
  EXPECT_DOUBLE_EQ(sx(0, 1), 0.8);
  EXPECT_DOUBLE_EQ(sx(0, 0), 1.0);
  EXPECT_EQ(sx(0, 2), 0.0);  // next block
  auto big = build_population_cov(100);
  Matrix bx = big.sigma.topLeftCorner(50, 50);
  EXPECT_DOUBLE_EQ(bx(0, 1), 0.8);
  EXPECT_NEAR(bx(0, 9), std::pow(0.8, 9), 1e-15);
  EXPECT_EQ(bx(0, 10), 0.0);
  EXPECT_EQ(big.sigma.bottomRightCorner(50, 50), bx);
}

TEST(PopulationCov, TopEigenpair) {
  for (Index p : {20, 40, 100}) {
    auto m = build_population_cov(p);
    auto g = m.gep();
    auto eig = oracle::generalized_eigen(g.a, g.b);
    const Index top = eig.values.size() - 1;
    EXPECT_NEAR(eig.values[top], 0.9, 1e-8) << p;
    Vector v = eig.vectors.col(top);
    Vector star = m.theta_star();
    const double cosine = std::abs(v.dot(star)) / (v.norm() * star.norm());
    EXPECT_GE(cosine, 1 - 1e-8) << p;
    EXPECT_NEAR(rayleigh(star, g), 0.9, 1e-10);
  }
}

TEST(PopulationCov, PlantedSupport) {
  auto m = build_population_cov(100);
  for (Index j = 0; j < 50; ++j) {
    const bool on = j == 0 || j == 5 || j == 10;
    EXPECT_EQ(m.vx_star[j] != 0.0, on);
    if (on) EXPECT_NEAR(m.vx_star[j], 1 / std::sqrt(3.0), 1e-15);
  }
  EXPECT_NEAR(m.vy_star.norm(), 1.0, 1e-15);
}

TEST(PopulationCov, PositiveDefinite) {
  for (Index p : {20, 40, 60}) {
    auto m = build_population_cov(p);
    EXPECT_LT((m.sigma - m.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.sigma);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(PopulationCov, InvalidDimension) {
  EXPECT_THROW(build_population_cov(15), Error);
  EXPECT_THROW(build_population_cov(0), Error);
  EXPECT_THROW(build_population_cov(25), Error);
}

TEST(GaussianPairs, LargeSampleCovariance) {
  auto m = build_population_cov(20);
  auto d = sample_gaussian_pairs(m, 100000, 7);
  ASSERT_EQ(d.n(), 100000);
  Matrix z(d.n(), 20);
  z << d.x, d.y;
  Matrix s = sample_covariance(z);
  EXPECT_LT((s - m.sigma).cwiseAbs().maxCoeff(), 0.05);
  const Vector mean = z.colwise().mean();
  for (Index j = 0; j < 20; ++j) {
    EXPECT_LT(std::abs(mean[j]), 3 * std::sqrt(m.sigma(j, j) / d.n())) << j;
  }
}

TEST(GaussianPairs, Deterministic) {
  auto m = build_population_cov(20);
  auto a = sample_gaussian_pairs(m, 50, 3);
  auto b = sample_gaussian_pairs(m, 50, 3);
  auto c = sample_gaussian_pairs(m, 50, 4);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(a.x, c.x);
}

TEST(GaussianPairs, NotPositiveDefinite) {
  auto m = build_population_cov(20);
  m.sigma(0, 0) = -1.0;
  EXPECT_THROW(sample_gaussian_pairs(m, 10, 1), Error);
}

TEST(Truncation, ZeroFractions) {
  auto m = build_population_cov(20);
  auto latent = sample_gaussian_pairs(m, 10000, 11);
  struct Case { double c; double tol; };
  for (auto [c, tol] : {Case{0.0, 0.03}, Case{-1.0, 0.02}, Case{-2.0, 0.03}}) {
    auto obs = truncate_copula(latent, TruncationSpec::uniform(10, c));
    auto f = zero_fraction(obs.y);
    for (Index j = 0; j < 10; ++j) EXPECT_NEAR(f[j], oracle::phi(c), tol) << c << " " << j;
    EXPECT_EQ(obs.x, latent.x);
    EXPECT_TRUE((zero_fraction(obs.x).array() == 0.0).all());
  }
  auto none = truncate_copula(latent, TruncationSpec::uniform(10, -1e300));
  EXPECT_EQ(none.y, latent.y);
}

TEST(Truncation, KeepsValuesAboveThreshold) {
  auto m = build_population_cov(20);
  auto latent = sample_gaussian_pairs(m, 200, 12);
  auto obs = truncate_copula(latent, TruncationSpec::uniform(10, 0.3));
  for (Index i = 0; i < 200; ++i)
    for (Index j = 0; j < 10; ++j)
      EXPECT_EQ(obs.y(i, j), latent.y(i, j) > 0.3 ? latent.y(i, j) : 0.0);
}

TEST(Truncation, Idempotent) {
  auto m = build_population_cov(20);
  auto latent = sample_gaussian_pairs(m, 500, 13);
  for (double c : {-1.0, 0.0, 0.5}) {
    auto spec = TruncationSpec::uniform(10, c);
    auto once = truncate_copula(latent, spec);
    auto twice = truncate_copula(once, spec);
    EXPECT_EQ(once.x, twice.x);
    EXPECT_EQ(once.y, twice.y);
  }
}

TEST(Truncation, TransformAppliesToViewOne) {
  auto m = build_population_cov(20);
  auto latent = sample_gaussian_pairs(m, 20, 14);
  auto spec = TruncationSpec::uniform(10, 0.0);
  spec.transform = [](Index, double v) { return std::exp(v); };
  auto obs = truncate_copula(latent, spec);
  EXPECT_LT((obs.x - latent.x.array().exp().matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(truncate_copula(latent, TruncationSpec::uniform(3, 0.0)), Error);
}
