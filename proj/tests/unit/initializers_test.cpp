#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/hull.hpp"
#include "vocabhull/initializers.hpp"

namespace vocabhull {
namespace {

std::vector<double> entries(const EmbeddingMatrix& m) {
  return {m.data().begin(), m.data().end()};
}

TEST(RandomInit, VarianceAndMean) {
  const auto sources = testing::gaussian_matrix(3, 10, 1);
  const auto t = init::init_random(10000, sources, Seed{17});
  const auto m = testing::moments(entries(t));
  EXPECT_GE(m.variance, 0.0194);
  EXPECT_LE(m.variance, 0.0206);
  EXPECT_GE(m.mean, -0.0045);
  EXPECT_LE(m.mean, 0.0045);
}

TEST(RandomInit, SameSeedSameBytes) {
  const auto sources = testing::gaussian_matrix(3, 6, 1);
  EXPECT_EQ(init::init_random(50, sources, Seed{5}), init::init_random(50, sources, Seed{5}));
  EXPECT_FALSE(init::init_random(50, sources, Seed{5}) == init::init_random(50, sources, Seed{6}));
}

TEST(RandomInit, RowsIndependentOfRowCount) {
  const auto sources = testing::gaussian_matrix(3, 6, 1);
  const auto few = init::init_random(5, sources, Seed{5});
  const auto many = init::init_random(50, sources, Seed{5});
  EXPECT_EQ(slice_rows(many, 0, 5), few);
}

TEST(RandomInit, ZeroRowsRejected) {
  EXPECT_THROW(init::init_random(0, testing::gaussian_matrix(2, 2, 1), Seed{1}), ValidationError);
}

TEST(MeanInit, TwoAxes) {
  const EmbeddingMatrix s(2, 2, {1, 0, 0, 1});
  const auto t = init::init_mean(3, s);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(t(i, 0), 0.5f);
    EXPECT_EQ(t(i, 1), 0.5f);
  }
}

TEST(MeanInit, SingleRowCopied) {
  const EmbeddingMatrix s(1, 3, {0.1f, -2.0f, 7.5f});
  const auto t = init::init_mean(2, s);
  EXPECT_EQ(slice_rows(t, 0, 1), s);
  EXPECT_EQ(slice_rows(t, 1, 2), s);
}

TEST(MeanInit, RowsInsideHull) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = testing::gaussian_matrix(12, 6, 60 + seed);
    const auto t = init::init_mean(2, s);
    for (const auto& m : hull::membership_rows(t, s)) EXPECT_TRUE(m.inside);
    EXPECT_EQ(hull::probe_condition(t, s, 2000, Seed{seed}).violations, 0u);
  }
}

TEST(UnivariateInit, ConstantColumnStaysConstant) {
  const EmbeddingMatrix s(3, 2, {1, 4, 2, 4, 3, 4});
  const auto t = init::init_univariate(100, s, Seed{3});
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(t(i, 1), 4.0f);
}

TEST(UnivariateInit, ColumnMeansWithinClt) {
  const auto s = testing::gaussian_matrix(40, 4, 70, 2.0);
  const auto src = testing::to_points(s);
  const std::size_t n = 100000;
  const auto t = init::init_univariate(n, s, Seed{4});
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> col, src_col;
    for (std::size_t i = 0; i < n; ++i) col.push_back(t(i, k));
    for (const auto& p : src) src_col.push_back(p[k]);
    const auto target = testing::moments(src_col);
    const double sd = std::sqrt(target.variance);
    EXPECT_NEAR(testing::moments(col).mean, target.mean, 5 * sd / std::sqrt(double(n)));
  }
}

TEST(UnivariateInit, NeedsTwoRows) {
  EXPECT_THROW(init::init_univariate(3, testing::gaussian_matrix(1, 2, 1), Seed{1}),
               ValidationError);
}

TEST(UnivariateInit, Deterministic) {
  const auto s = testing::gaussian_matrix(5, 3, 71);
  EXPECT_EQ(init::init_univariate(20, s, Seed{8}), init::init_univariate(20, s, Seed{8}));
}

TEST(MultivariateInit, VanishingScaleGivesMean) {
  const auto s = testing::gaussian_matrix(10, 4, 80);
  const auto mean = init::init_mean(1, s);
  const auto t = init::init_multivariate(20, s, 1e-18, Seed{9});
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(t(i, k), mean(0, k), 1e-6);
  }
}

TEST(MultivariateInit, SampleCovarianceMatchesScaledSource) {
  const auto s = testing::gaussian_matrix(30, 3, 81, 1.5);
  const double scale = 0.5;
  const std::size_t n = 100000;
  const auto t = init::init_multivariate(n, s, scale, Seed{10});

  const auto cov = [](const EmbeddingMatrix& m) {
    const Eigen::MatrixXd x = m.to_eigen();
    const Eigen::RowVectorXd mu = x.colwise().mean();
    const Eigen::MatrixXd c = x.rowwise() - mu;
    return Eigen::MatrixXd(c.transpose() * c / double(x.rows() - 1));
  };
  const Eigen::MatrixXd expected = scale * cov(s);
  EXPECT_LE((cov(t) - expected).norm() / expected.norm(), 0.10);
}

TEST(MultivariateInit, SingularCovarianceIsFine) {
  const auto s = testing::gaussian_matrix(3, 8, 82);
  const auto t = init::init_multivariate(50, s, 1.0, Seed{11});
  EXPECT_EQ(t.rows(), 50u);
}

TEST(MultivariateInit, SmallCovScaleStaysNearHull) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = testing::gaussian_matrix(40, 6, 90 + seed);
    const auto t = init::init_multivariate(20, s, init::kDefaultCovScale, Seed{seed});
    for (const auto& m : hull::membership_rows(t, s)) EXPECT_LE(m.certificate.residual, 1e-2);
  }
}

TEST(ConvexInit, LargeLogitSelectsRow) {
  const auto s = testing::gaussian_matrix(4, 3, 100);
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(1, 4);
  logits(0, 2) = 60.0;
  const auto t = init::init_convex(logits, s);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(t(0, k), s(2, k), 1e-6);
}

TEST(ConvexInit, ZeroLogitsGiveCentroid) {
  const auto s = testing::gaussian_matrix(4, 3, 101);
  const auto t = init::init_convex(Eigen::MatrixXd::Zero(2, 4), s);
  const auto mean = init::init_mean(1, s);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(t(1, k), mean(0, k), 1e-6);
}

TEST(ConvexInit, RowsInsideHullAndProbeClean) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testing::gaussian_matrix(9, 4, 110 + trial);
    Eigen::MatrixXd logits(5, 9);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
    const auto t = init::init_convex(logits, s);
    const auto rows = hull::membership_rows(t, s);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double bound = 1e-6 * testing::norm(t.row_as_double(i)) + 1e-9;
      EXPECT_LE(rows[i].certificate.residual, std::max(bound, hull::kDefaultTol));
    }
    EXPECT_EQ(hull::probe_condition(t, s, 2000, Seed{99}).violations, 0u);
  }
}

TEST(ConvexInit, ShapeMismatchThrows) {
  const auto s = testing::gaussian_matrix(4, 3, 102);
  EXPECT_THROW(init::init_convex(Eigen::MatrixXd::Zero(2, 5), s), ValidationError);
}

TEST(RowSoftmax, RowsOnSimplex) {
  Eigen::MatrixXd logits(2, 3);
  logits << 1000, 0, -1000, 1, 2, 3;
  const auto p = init::row_softmax(logits);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(p.row(i).minCoeff(), 0.0);
  }
  const auto expected = testing::softmax({1, 2, 3});
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(p(1, j), expected[j], 1e-15);
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {init::Method::random, init::Method::mean, init::Method::univariate,
                 init::Method::multivariate, init::Method::convex}) {
    EXPECT_EQ(init::parse_method(init::method_name(m)), m);
  }
  EXPECT_FALSE(init::parse_method("ofa").has_value());
}

TEST(RandomInit, ProbeFindsViolationsOnSmallSources) {
  const auto s = testing::adversarial_source_head();
  const auto t = init::init_random(testing::kAdversarialTargets, s, Seed{1});
  EXPECT_GT(hull::probe_condition(t, s, 2000, Seed{2}).violations, 0u);
}

}  // namespace
}  // namespace vocabhull
