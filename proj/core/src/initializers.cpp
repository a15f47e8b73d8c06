#include "vocabhull/initializers.hpp"

#include <cmath>
#include <random>
#include <string>

#include "vocabhull/error.hpp"
#include "vocabhull/parallel.hpp"

namespace vocabhull {

ExpandedModel expand(const EmbeddingMatrix& sources_input, const EmbeddingMatrix& sources_lm_head,
                     const EmbeddingMatrix& target_input_block,
                     const EmbeddingMatrix& target_lm_head_block) {
  if (sources_input.rows() != sources_lm_head.rows()) {
    throw ValidationError("source input has " + std::to_string(sources_input.rows()) +
                          " rows, source LM head has " + std::to_string(sources_lm_head.rows()));
  }
  if (sources_input.dim() != sources_lm_head.dim()) {
    throw ValidationError("source input and LM head dims differ");
  }
  if (target_input_block.rows() != target_lm_head_block.rows()) {
    throw ValidationError("target input and LM head blocks have different row counts");
  }
  if (target_input_block.dim() != sources_input.dim() ||
      target_lm_head_block.dim() != sources_lm_head.dim()) {
    throw ValidationError("target block dim does not match its source matrix");
  }
  return ExpandedModel{concat_rows(sources_input, target_input_block),
                       concat_rows(sources_lm_head, target_lm_head_block), sources_input.rows(),
                       target_input_block.rows()};
}

namespace init {

namespace {

void check_target_count(std::size_t n_target) {
  if (n_target < 1) throw ValidationError("n_target must be >= 1");
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd& s) { return s.colwise().mean().transpose(); }

// Sample covariance (n - 1 denominator).
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd centered = s.rowwise() - s.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(s.rows() - 1);
}

}  // namespace

std::optional<Method> parse_method(std::string_view name) {
  if (name == "random") return Method::random;
  if (name == "mean") return Method::mean;
  if (name == "univariate") return Method::univariate;
  if (name == "multivariate") return Method::multivariate;
  if (name == "convex") return Method::convex;
  return std::nullopt;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::random: return "random";
    case Method::mean: return "mean";
    case Method::univariate: return "univariate";
    case Method::multivariate: return "multivariate";
    case Method::convex: return "convex";
  }
  return "unknown";
}

EmbeddingMatrix init_random(std::size_t n_target, const EmbeddingMatrix& sources, Seed seed) {
  check_target_count(n_target);
  const std::size_t d = sources.dim();
  const double stddev = std::sqrt(kRandomVariance);
  std::vector<float> data(n_target * d);
  parallel_for(n_target, [&](std::size_t i) {
    auto rng = make_engine(seed, i);
    std::normal_distribution<double> normal(0.0, stddev);
    for (std::size_t k = 0; k < d; ++k) data[i * d + k] = static_cast<float>(normal(rng));
  }, 64);
  return EmbeddingMatrix(n_target, d, std::move(data));
}

EmbeddingMatrix init_mean(std::size_t n_target, const EmbeddingMatrix& sources) {
  check_target_count(n_target);
  const Eigen::VectorXd mean = column_mean(sources.to_eigen());
  const std::size_t d = sources.dim();
  std::vector<float> data(n_target * d);
  for (std::size_t i = 0; i < n_target; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      data[i * d + k] = static_cast<float>(mean(static_cast<Eigen::Index>(k)));
    }
  }
  return EmbeddingMatrix(n_target, d, std::move(data));
}

EmbeddingMatrix init_univariate(std::size_t n_target, const EmbeddingMatrix& sources, Seed seed) {
  check_target_count(n_target);
  if (sources.rows() < 2) {
    throw ValidationError("univariate init needs >= 2 source rows for a standard deviation");
  }
  const Eigen::MatrixXd s = sources.to_eigen();
  const Eigen::VectorXd mean = column_mean(s);
  const Eigen::VectorXd stddev = sample_covariance(s).diagonal().cwiseMax(0.0).cwiseSqrt();
  if (!mean.allFinite() || !stddev.allFinite()) throw NumericError("non-finite source statistics");

  const std::size_t d = sources.dim();
  std::vector<float> data(n_target * d);
  parallel_for(n_target, [&](std::size_t i) {
    auto rng = make_engine(seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < d; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      data[i * d + k] = static_cast<float>(mean(kk) + stddev(kk) * normal(rng));
    }
  }, 64);
  return EmbeddingMatrix(n_target, d, std::move(data));
}

EmbeddingMatrix init_multivariate(std::size_t n_target, const EmbeddingMatrix& sources,
                                  double cov_scale, Seed seed) {
  check_target_count(n_target);
  if (!(cov_scale > 0.0) || !std::isfinite(cov_scale)) {
    throw ValidationError("cov_scale must be a finite value > 0");
  }
  if (sources.rows() < 2) {
    throw ValidationError("multivariate init needs >= 2 source rows for a covariance");
  }
  const Eigen::MatrixXd s = sources.to_eigen();
  const Eigen::VectorXd mean = column_mean(s);
  const Eigen::MatrixXd cov = sample_covariance(s);
  if (!cov.allFinite()) throw NumericError("non-finite source covariance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
  // x = mean + V * sqrt(scale * max(lambda, 0)) * z
  const Eigen::VectorXd root =
      (eig.eigenvalues().cwiseMax(0.0) * cov_scale).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();

  const std::size_t d = sources.dim();
  std::vector<float> data(n_target * d);
  parallel_for(n_target, [&](std::size_t i) {
    auto rng = make_engine(seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) z(static_cast<Eigen::Index>(k)) = normal(rng);
    const Eigen::VectorXd x = mean + factor * z;
    for (std::size_t k = 0; k < d; ++k) {
      data[i * d + k] = static_cast<float>(x(static_cast<Eigen::Index>(k)));
    }
  }, 64);
  return EmbeddingMatrix(n_target, d, std::move(data));
}

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

EmbeddingMatrix init_convex(const Eigen::MatrixXd& logits, const EmbeddingMatrix& sources) {
  if (logits.rows() < 1) throw ValidationError("convex init needs at least one weight row");
  if (static_cast<std::size_t>(logits.cols()) != sources.rows()) {
    throw ValidationError("mixing weights have " + std::to_string(logits.cols()) +
                          " columns, sources have " + std::to_string(sources.rows()) + " rows");
  }
  if (!logits.allFinite()) throw NumericError("non-finite mixing logits");
  const Eigen::MatrixXd mixed = row_softmax(logits) * sources.to_eigen();
  return EmbeddingMatrix::from_eigen(mixed);
}

EmbeddingMatrix initialize(const InitSpec& spec, std::size_t n_target,
                           const EmbeddingMatrix& sources) {
  switch (spec.kind) {
    case Method::random: return init_random(n_target, sources, spec.seed);
    case Method::mean: return init_mean(n_target, sources);
    case Method::univariate: return init_univariate(n_target, sources, spec.seed);
    case Method::multivariate:
      return init_multivariate(n_target, sources, spec.cov_scale, spec.seed);
    case Method::convex:
      if (spec.logits == nullptr) throw ValidationError("convex init requires mixing weights");
      if (static_cast<std::size_t>(spec.logits->rows()) != n_target) {
        throw ValidationError("mixing weights have " + std::to_string(spec.logits->rows()) +
                              " rows, expected " + std::to_string(n_target));
      }
      return init_convex(*spec.logits, sources);
  }
  throw ValidationError("unknown init method");
}

}  // namespace init
}  // namespace vocabhull
