#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/fixtures.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/initializers.hpp"
#include "vocabhull/matrix.hpp"

namespace vocabhull {
namespace {

TEST(EmbeddingMatrix, RejectsEmptyShapes) {
  EXPECT_THROW(EmbeddingMatrix(0, 3), ValidationError);
  EXPECT_THROW(EmbeddingMatrix(2, 0), ValidationError);
  EXPECT_THROW(EmbeddingMatrix(2, 2, {1.0f, 2.0f, 3.0f}), ValidationError);
}

TEST(EmbeddingMatrix, RejectsNonFinite) {
  EXPECT_THROW(EmbeddingMatrix(1, 2, {1.0f, NAN}), NumericError);
  EXPECT_THROW(EmbeddingMatrix(1, 1, {INFINITY}), NumericError);
}

TEST(Logits, UnitVectorPicksFirstAxis) {
  const EmbeddingMatrix m(2, 2, {1, 0, 0, 1});
  const std::vector<double> h = {1, 0};
  EXPECT_EQ(logits(h, m), (std::vector<double>{1, 0}));
}

TEST(Logits, ZeroHiddenTiesToRowZero) {
  const EmbeddingMatrix m(3, 2, {1, 2, -1, 0, 5, 5});
  const std::vector<double> h = {0, 0};
  const auto out = logits(h, m);
  EXPECT_EQ(out, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(argmax(out), 0u);
}

TEST(Logits, HandComputedDotProducts) {
  const EmbeddingMatrix m(3, 2, {1, 1, 3, 0, 0, 3});
  const std::vector<double> h = {2, 1};
  const auto out = logits(h, m);
  EXPECT_EQ(out, (std::vector<double>{3, 6, 3}));
  EXPECT_EQ(argmax(out), 1u);
}

TEST(Logits, DimensionMismatchThrows) {
  const EmbeddingMatrix m(2, 3);
  const std::vector<double> h = {1, 2};
  EXPECT_THROW(logits(h, m), ValidationError);
}

TEST(Logits, ArgmaxLowestIndexOnTies) {
  EXPECT_EQ(argmax(std::vector<double>{1, 3, 3, 2}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{-1, -1}), 0u);
}

TEST(Logits, LinearInHidden) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testing::gaussian_matrix(7, 5, 100 + trial);
    std::vector<double> h1(5), h2(5), mix(5);
    const double a = normal(rng), b = normal(rng);
    for (int k = 0; k < 5; ++k) {
      h1[k] = normal(rng);
      h2[k] = normal(rng);
      mix[k] = a * h1[k] + b * h2[k];
    }
    const auto l1 = logits(h1, m), l2 = logits(h2, m), lm = logits(mix, m);
    for (std::size_t j = 0; j < lm.size(); ++j) {
      const double expected = a * l1[j] + b * l2[j];
      EXPECT_NEAR(lm[j], expected, 1e-6 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(Expand, AppendsBlocksAndKeepsSourceBytes) {
  const auto s_in = testing::gaussian_matrix(2, 3, 1);
  const auto s_head = testing::gaussian_matrix(2, 3, 2);
  const auto t_in = testing::gaussian_matrix(1, 3, 3);
  const auto t_head = testing::gaussian_matrix(1, 3, 4);
  const auto before_in = s_in;
  const auto model = expand(s_in, s_head, t_in, t_head);
  EXPECT_EQ(model.input.rows(), 3u);
  EXPECT_EQ(model.lm_head.rows(), 3u);
  EXPECT_EQ(model.source_size, 2u);
  EXPECT_EQ(model.target_size, 1u);
  EXPECT_EQ(slice_rows(model.input, 0, 2), s_in);
  EXPECT_EQ(slice_rows(model.lm_head, 0, 2), s_head);
  EXPECT_EQ(slice_rows(model.input, 2, 3), t_in);
  EXPECT_EQ(s_in, before_in);
}

TEST(Expand, TiedBlocksGiveEqualMatrices) {
  const auto s = testing::gaussian_matrix(4, 2, 5);
  const auto t = testing::gaussian_matrix(3, 2, 6);
  const auto model = expand(s, s, t, t);
  EXPECT_EQ(model.input, model.lm_head);
}

TEST(Expand, DimMismatchThrows) {
  const auto s = testing::gaussian_matrix(4, 2, 5);
  const auto t = testing::gaussian_matrix(3, 3, 6);
  EXPECT_THROW(expand(s, s, t, t), ValidationError);
}

}  // namespace
}  // namespace vocabhull
