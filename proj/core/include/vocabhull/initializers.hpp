#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "vocabhull/matrix.hpp"
#include "vocabhull/random.hpp"

namespace vocabhull {

// Source matrices with appended target blocks. Rows [0, source_size) of both
// matrices are the untouched source rows.
struct ExpandedModel {
  EmbeddingMatrix input;
  EmbeddingMatrix lm_head;
  std::size_t source_size = 0;
  std::size_t target_size = 0;
};

// Concatenates target blocks under the source matrices. Passing the same
// block for input and head gives a tied model. Throws ValidationError on
// dim mismatch.
ExpandedModel expand(const EmbeddingMatrix& sources_input, const EmbeddingMatrix& sources_lm_head,
                     const EmbeddingMatrix& target_input_block,
                     const EmbeddingMatrix& target_lm_head_block);

namespace init {

inline constexpr double kRandomVariance = 0.02;
inline constexpr double kDefaultCovScale = 1e-5;

enum class Method { random, mean, univariate, multivariate, convex };

std::optional<Method> parse_method(std::string_view name);
std::string_view method_name(Method m);

struct InitSpec {
  Method kind = Method::mean;
  Seed seed{};
  double cov_scale = kDefaultCovScale;       // multivariate only
  const Eigen::MatrixXd* logits = nullptr;   // convex only: n_target x n_source
};

// i.i.d. Normal(0, 0.02) entries; row i uses its own stream derived from the seed.
EmbeddingMatrix init_random(std::size_t n_target, const EmbeddingMatrix& sources, Seed seed);

// Every row is the column-wise mean of the sources.
EmbeddingMatrix init_mean(std::size_t n_target, const EmbeddingMatrix& sources);

// Entry (i, k) ~ Normal(mean_k, std_k^2) with per-column sample statistics.
// Needs at least two source rows.
EmbeddingMatrix init_univariate(std::size_t n_target, const EmbeddingMatrix& sources, Seed seed);

// Rows ~ Normal(mean, cov_scale * Sigma), Sigma the sample covariance.
// Sampling goes through the eigendecomposition of Sigma with negative
// eigenvalues clamped to zero, so singular covariances (rows <= dim) are fine.
EmbeddingMatrix init_multivariate(std::size_t n_target, const EmbeddingMatrix& sources,
                                  double cov_scale, Seed seed);

// Row i = sum_j softmax(logits_i)_j * e_j. Each output row is a convex
// combination of source rows.
EmbeddingMatrix init_convex(const Eigen::MatrixXd& logits, const EmbeddingMatrix& sources);

EmbeddingMatrix initialize(const InitSpec& spec, std::size_t n_target,
                           const EmbeddingMatrix& sources);

// Numerically stable row-wise softmax.
Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits);

}  // namespace init
}  // namespace vocabhull
