#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/hull.hpp"
#include "vocabhull/initializers.hpp"
#include "vocabhull/parallel.hpp"

namespace vocabhull {
namespace {

using testing::Point;
using testing::Points;

const EmbeddingMatrix kSegment(2, 2, {1, 0, 0, 1});

Point recompute_projection(const hull::HullCertificate& c, const EmbeddingMatrix& s) {
  Point p(s.dim(), 0.0);
  for (std::size_t j = 0; j < s.rows(); ++j) {
    for (std::size_t k = 0; k < s.dim(); ++k) p[k] += c.weights[j] * s(j, k);
  }
  return p;
}

double distance(const Point& a, const Point& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc);
}

void expect_sound(const Point& y, const hull::HullCertificate& c, const EmbeddingMatrix& s) {
  double sum = 0.0;
  for (double w : c.weights) {
    EXPECT_GE(w, 0.0);
    sum += w;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_GE(c.residual, 0.0);
  EXPECT_NEAR(distance(y, recompute_projection(c, s)), c.residual, 1e-9);
}

TEST(Projection, VertexIsOneHot) {
  const auto s = testing::gaussian_matrix(6, 3, 11);
  const auto y = s.row_as_double(3);
  const auto c = hull::project_to_hull(y, s);
  EXPECT_EQ(c.residual, 0.0);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(c.weights[j], j == 3 ? 1.0 : 0.0);
}

TEST(Projection, MidpointOfSegment) {
  const Point y = {0.5, 0.5};
  const auto c = hull::project_to_hull(y, kSegment);
  EXPECT_LE(c.residual, 1e-6);
  EXPECT_NEAR(c.weights[0], 0.5, 1e-6);
  EXPECT_NEAR(c.weights[1], 0.5, 1e-6);
}

TEST(Projection, OutsideSegmentEndpoint) {
  const Point y = {2, 0};
  const auto c = hull::project_to_hull(y, kSegment);
  EXPECT_NEAR(c.residual, 1.0, 1e-9);
  EXPECT_NEAR(c.projection[0], 1.0, 1e-9);
  EXPECT_NEAR(c.projection[1], 0.0, 1e-9);
}

TEST(Projection, RejectsBadArguments) {
  const Point y3 = {1, 2, 3};
  EXPECT_THROW(hull::project_to_hull(y3, kSegment), ValidationError);
  const Point bad = {NAN, 0};
  EXPECT_THROW(hull::project_to_hull(bad, kSegment), ValidationError);
  const Point y = {1, 1};
  EXPECT_THROW(hull::project_to_hull(y, kSegment, 0), ValidationError);
  EXPECT_THROW(hull::project_to_hull(y, kSegment, 10, 0.0), ValidationError);
}

TEST(Projection, ResidualNeverIncreases) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  hull::ProjectionOptions opts;
  opts.record_history = true;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = testing::gaussian_matrix(20, 6, 300 + trial);
    Point y(6);
    for (double& v : y) v = 2.0 * normal(rng);
    const auto c = hull::SourceHull(s).project(y, opts);
    ASSERT_FALSE(c.residual_history.empty());
    for (std::size_t i = 1; i < c.residual_history.size(); ++i) {
      EXPECT_LE(c.residual_history[i], c.residual_history[i - 1] + 1e-12);
    }
    expect_sound(y, c, s);
  }
}

TEST(Projection, InteriorPointsConverge) {
  std::mt19937_64 rng(6);
  std::gamma_distribution<double> gamma(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = testing::gaussian_matrix(30, 8, 400 + trial);
    std::vector<double> w(30);
    double z = 0.0;
    for (double& v : w) z += v = gamma(rng);
    Point y(8, 0.0);
    for (std::size_t j = 0; j < 30; ++j) {
      for (std::size_t k = 0; k < 8; ++k) y[k] += w[j] / z * s(j, k);
    }
    const auto m = hull::membership(y, s);
    EXPECT_TRUE(m.inside) << m.certificate.residual;
    EXPECT_TRUE(m.certificate.converged);
    expect_sound(y, m.certificate, s);
  }
}

TEST(Membership, CentroidInside) {
  const auto s = testing::gaussian_matrix(5, 3, 21);
  const auto centroid = init::init_mean(1, s);
  EXPECT_TRUE(hull::membership(centroid.row_as_double(0), s).inside);
}

TEST(Membership, ReflectedFarthestVertexOutside) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = testing::gaussian_matrix(6, 3, 500 + seed);
    const auto pts = testing::to_points(s);
    const auto c = init::init_mean(1, s).row_as_double(0);
    std::size_t far = 0;
    for (std::size_t j = 1; j < pts.size(); ++j) {
      if (distance(pts[j], c) > distance(pts[far], c)) far = j;
    }
    Point y(3);
    for (int k = 0; k < 3; ++k) y[k] = 2 * pts[far][k] - c[k];
    ASSERT_GT(testing::hull_distance(y, pts), 1e-6);
    EXPECT_FALSE(hull::membership(y, s).inside);
  }
}

TEST(Membership, SingleSource) {
  const EmbeddingMatrix s(1, 3, {0.25f, -1.5f, 2.0f});
  const auto m = hull::membership(s.row_as_double(0), s);
  EXPECT_TRUE(m.inside);
  EXPECT_EQ(m.certificate.residual, 0.0);
}

TEST(Membership, AgreesWithEnumerationOracle) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 3), count(1, 8);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int d = dim(rng), n = count(rng);
    const auto s = testing::gaussian_matrix(n, d, 900 + trial);
    const auto pts = testing::to_points(s);
    Point y(d);
    for (double& v : y) v = 0.8 * normal(rng);
    const double exact = testing::hull_distance(y, pts);
    if (std::abs(exact - hull::kDefaultTol) < 1e-8) continue;
    const auto m = hull::membership(y, s);
    EXPECT_EQ(m.inside, exact <= hull::kDefaultTol) << "trial " << trial << " d=" << d << " n=" << n;
    EXPECT_NEAR(m.certificate.residual, exact, 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 390);
}

TEST(Separation, EndpointExample) {
  const Point y = {2, 0};
  const auto w = hull::separating_direction(y, kSegment);
  EXPECT_NEAR(w.direction[0], 1.0, 1e-9);
  EXPECT_NEAR(w.direction[1], 0.0, 1e-9);
  EXPECT_NEAR(w.margin, 1.0, 1e-9);
}

TEST(Separation, DiagonalExample) {
  const Point y = {1, 1};
  const auto w = hull::separating_direction(y, kSegment);
  EXPECT_NEAR(w.direction[0], std::sqrt(2.0) / 2, 1e-9);
  EXPECT_NEAR(w.direction[1], std::sqrt(2.0) / 2, 1e-9);
  EXPECT_NEAR(w.margin, std::sqrt(2.0) / 2, 1e-9);
}

TEST(Separation, InteriorPointHasNoWitness) {
  const Point y = {0.5, 0.5};
  EXPECT_THROW(hull::separating_direction(y, kSegment), hull::NoWitnessError);
}

TEST(Separation, WitnessesAreSound) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = testing::gaussian_matrix(12, 5, 1200 + trial);
    const auto pts = testing::to_points(s);
    Point y(5);
    for (double& v : y) v = 3.0 * normal(rng);
    if (hull::membership(y, s).certificate.residual <= 1e-3) continue;
    const auto w = hull::separating_direction(y, s);
    EXPECT_NEAR(testing::norm(w.direction), 1.0, 1e-9);
    const double margin = testing::dot(w.direction, y) - testing::max_dot(w.direction, pts);
    EXPECT_GT(margin, 0.0);
    EXPECT_NEAR(margin, w.margin, 1e-9);
  }
}

TEST(Probe, CopiedRowsNeverViolate) {
  const auto s = testing::gaussian_matrix(10, 4, 31);
  const auto t = slice_rows(s, 2, 7);
  const auto r = hull::probe_condition(t, s, 5000, Seed{1});
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.directions, 5000u);
}

TEST(Probe, CentroidNeverViolates) {
  const auto s = testing::gaussian_matrix(10, 4, 32);
  EXPECT_EQ(hull::probe_condition(init::init_mean(3, s), s, 5000, Seed{2}).violations, 0u);
}

TEST(Probe, ScaledRowViolatesNearItsDirection) {
  const auto s = testing::gaussian_matrix(6, 3, 33);
  const auto pts = testing::to_points(s);
  Point big(3);
  for (int k = 0; k < 3; ++k) big[k] = 10 * pts[0][k];
  // Along its own direction the scaled row beats every source.
  const double n0 = testing::norm(pts[0]);
  Point h(3);
  for (int k = 0; k < 3; ++k) h[k] = pts[0][k] / n0;
  ASSERT_GT(testing::dot(h, big), testing::max_dot(h, pts));

  const auto t = testing::from_points({big});
  const auto r = hull::probe_condition(t, s, 10000, Seed{3});
  EXPECT_GT(r.violations, 0u);
  EXPECT_GT(r.worst_margin, 0.0);
  EXPECT_GT(testing::dot(r.worst_direction, h), 0.5);
}

TEST(Probe, DeterministicAcrossThreadCounts) {
  const auto s = testing::gaussian_matrix(6, 3, 34);
  const auto t = testing::gaussian_matrix(4, 3, 35, 3.0);
  set_max_threads(1);
  const auto a = hull::probe_condition(t, s, 3000, Seed{4});
  set_max_threads(6);
  const auto b = hull::probe_condition(t, s, 3000, Seed{4});
  set_max_threads(0);
  EXPECT_EQ(a.violations, b.violations);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  EXPECT_EQ(a.worst_direction, b.worst_direction);
}

TEST(Probe, DirectionsAreUnit) {
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(testing::norm(hull::probe_direction(Seed{7}, i, 9)), 1.0, 1e-12);
  }
}

TEST(Probe, ConvexCombinationsNeverViolate) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testing::gaussian_matrix(15, 5, 1500 + trial);
    Eigen::MatrixXd logits(7, 15);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
    const auto t = init::init_convex(logits, s);
    EXPECT_EQ(hull::probe_condition(t, s, 2000, Seed{static_cast<std::uint64_t>(trial)}).violations,
              0u);
  }
}

TEST(Probe, DimensionMismatchThrows) {
  EXPECT_THROW(hull::probe_condition(EmbeddingMatrix(2, 3), kSegment, 10, Seed{1}),
               ValidationError);
}

}  // namespace
}  // namespace vocabhull
