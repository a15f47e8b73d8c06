#include "vocabhull/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vocabhull/parallel.hpp"

namespace vocabhull::hull {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

void check_finite(std::span<const double> y) {
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!std::isfinite(y[k])) {
      throw ValidationError("non-finite query coordinate " + std::to_string(k));
    }
  }
}

void check_options(const ProjectionOptions& opts) {
  if (opts.max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be > 0");
}

VectorXd to_vector(std::span<const double> y) {
  return Eigen::Map<const VectorXd>(y.data(), static_cast<Index>(y.size()));
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

constexpr std::size_t kPolishEvery = 16;
constexpr Index kMaxPolishSupport = 512;
constexpr int kMaxPolishRounds = 8;

// Active-set refinement on the support of alpha: smallest weight change
// reaching the affine minimiser, cut at the first weight to hit zero.
void polish(const Eigen::MatrixXd& sources, const VectorXd& y, VectorXd& alpha, VectorXd& x) {
  for (int round = 0; round < kMaxPolishRounds; ++round) {
    std::vector<Index> support;
    for (Index j = 0; j < alpha.size(); ++j) {
      if (alpha(j) > 0.0) support.push_back(j);
    }
    const auto s = static_cast<Index>(support.size());
    if (s < 2 || s > kMaxPolishSupport) return;

    // Orthonormal basis of {delta : sum delta = 0} on the support.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(s, 1));
    const Eigen::MatrixXd z = Eigen::MatrixXd(qr.householderQ()).rightCols(s - 1);
    Eigen::MatrixXd es(sources.cols(), s);
    for (Index j = 0; j < s; ++j) es.col(j) = sources.row(support[j]).transpose();
    const VectorXd gamma = (es * z).completeOrthogonalDecomposition().solve(y - x);
    const VectorXd step = z * gamma;
    if (!step.allFinite()) return;

    double t = 1.0;
    Index blocking = -1;
    for (Index j = 0; j < s; ++j) {
      const double a = alpha(support[j]);
      if (step(j) < 0.0 && a + t * step(j) < 0.0) {
        t = -a / step(j);
        blocking = j;
      }
    }
    VectorXd next = alpha;
    for (Index j = 0; j < s; ++j) next(support[j]) += t * step(j);
    if (blocking >= 0) next(support[blocking]) = 0.0;
    next = next.cwiseMax(0.0);
    next /= next.sum();
    const VectorXd next_x = sources.transpose() * next;
    if ((y - next_x).squaredNorm() > (y - x).squaredNorm()) return;
    alpha = std::move(next);
    x = next_x;
    if (blocking < 0) return;
  }
}

}  // namespace

SourceHull::SourceHull(const EmbeddingMatrix& sources) : SourceHull(sources.to_eigen()) {}

SourceHull::SourceHull(Eigen::MatrixXd sources) : sources_(std::move(sources)), scale2_(0.0) {
  if (sources_.rows() == 0 || sources_.cols() == 0) {
    throw ValidationError("hull needs at least one source row");
  }
  if (!sources_.allFinite()) throw ValidationError("non-finite source embedding");
  scale2_ = sources_.rowwise().squaredNorm().maxCoeff();
}

HullCertificate SourceHull::project(std::span<const double> y_span,
                                    const ProjectionOptions& opts) const {
  check_options(opts);
  if (y_span.size() != dim()) {
    throw ValidationError("query has dim " + std::to_string(y_span.size()) + ", sources have dim " +
                          std::to_string(dim()));
  }
  check_finite(y_span);

  const Index n = sources_.rows();
  const VectorXd y = to_vector(y_span);

  // Objective f(alpha) = 1/2 ||y - E^T alpha||^2. Start from the nearest vertex.
  Index start = 0;
  (sources_.rowwise() - y.transpose()).rowwise().squaredNorm().minCoeff(&start);

  VectorXd alpha = VectorXd::Zero(n);
  alpha(start) = 1.0;
  VectorXd x = sources_.row(start).transpose();

  // Stop on duality gap <= 0.01 tol^2.
  const double scale2 = std::max(scale2_, y.squaredNorm());
  const double gap_tol = std::max(0.01 * opts.tol * opts.tol, 1e-13 * std::max(1.0, scale2));

  HullCertificate cert;
  VectorXd scores(n);
  std::size_t it = 0;
  for (; it < opts.max_iters; ++it) {
    const VectorXd r = y - x;
    const double res2 = r.squaredNorm();
    if (opts.record_history) cert.residual_history.push_back(std::sqrt(res2));
    if (res2 == 0.0) {
      cert.converged = true;
      break;
    }

    scores.noalias() = sources_ * r;
    const double rx = r.dot(x);

    Index fw = 0;
    scores.maxCoeff(&fw);
    const double gap_fw = scores(fw) - rx;
    if (gap_fw <= gap_tol) {
      cert.converged = true;
      break;
    }

    Index away = -1;
    for (Index j = 0; j < n; ++j) {
      if (alpha(j) > 0.0 && (away < 0 || scores(j) < scores(away))) away = j;
    }
    const double gap_away = rx - scores(away);

    const bool fw_step = gap_fw >= gap_away || alpha(away) >= 1.0;
    VectorXd d;
    double gamma_max;
    if (fw_step) {
      d = sources_.row(fw).transpose() - x;
      gamma_max = 1.0;
    } else {
      d = x - sources_.row(away).transpose();
      gamma_max = alpha(away) / (1.0 - alpha(away));
    }
    const double dd = d.squaredNorm();
    if (dd == 0.0) {
      cert.converged = true;
      break;
    }
    const double gamma = std::clamp(r.dot(d) / dd, 0.0, gamma_max);
    if (gamma == 0.0) {
      cert.converged = true;
      break;
    }

    if (fw_step) {
      if (gamma >= 1.0) {
        alpha.setZero();
        alpha(fw) = 1.0;
        x = sources_.row(fw).transpose();
      } else {
        alpha *= (1.0 - gamma);
        alpha(fw) += gamma;
        x += gamma * d;
      }
    } else {
      alpha *= (1.0 + gamma);
      alpha(away) -= gamma;
      if (gamma >= gamma_max) alpha(away) = 0.0;
      x += gamma * d;
    }

    if (it % kPolishEvery == kPolishEvery - 1) {
      polish(sources_, y, alpha, x);
    } else if ((it & 63) == 63) {
      x = sources_.transpose() * alpha;
    }
  }
  cert.iterations = it;

  alpha = alpha.cwiseMax(0.0);
  alpha /= alpha.sum();
  x = sources_.transpose() * alpha;
  cert.weights = to_std(alpha);
  cert.projection = to_std(x);
  cert.residual = (y - x).norm();
  return cert;
}

Membership SourceHull::membership(std::span<const double> y, const ProjectionOptions& opts) const {
  Membership m;
  m.certificate = project(y, opts);
  m.inside = m.certificate.residual <= opts.tol;
  return m;
}

SeparationWitness SourceHull::separating_direction(std::span<const double> y_span,
                                                   const ProjectionOptions& opts) const {
  const HullCertificate cert = project(y_span, opts);
  if (cert.residual <= opts.tol) {
    throw NoWitnessError("point lies inside the hull (residual " +
                         std::to_string(cert.residual) + " <= tol " + std::to_string(opts.tol) +
                         "); no separating direction exists");
  }
  const VectorXd y = to_vector(y_span);
  const VectorXd p = to_vector(cert.projection);
  const VectorXd n = (y - p) / (y - p).norm();
  const double margin = n.dot(y) - (sources_ * n).maxCoeff();
  if (!(margin > 0.0)) {
    throw NumericError("projection did not converge far enough to separate the point (margin " +
                       std::to_string(margin) + "); raise max_iters");
  }
  SeparationWitness w;
  w.direction = to_std(n);
  w.margin = margin;
  w.projection = cert.projection;
  return w;
}

HullCertificate project_to_hull(std::span<const double> y, const EmbeddingMatrix& sources,
                                std::size_t max_iters, double tol) {
  return SourceHull(sources).project(y, {max_iters, tol, false});
}

Membership membership(std::span<const double> y, const EmbeddingMatrix& sources, double tol,
                      std::size_t max_iters) {
  return SourceHull(sources).membership(y, {max_iters, tol, false});
}

SeparationWitness separating_direction(std::span<const double> y, const EmbeddingMatrix& sources,
                                       const ProjectionOptions& opts) {
  return SourceHull(sources).separating_direction(y, opts);
}

std::vector<Membership> membership_rows(const EmbeddingMatrix& targets,
                                        const EmbeddingMatrix& sources,
                                        const ProjectionOptions& opts) {
  if (targets.dim() != sources.dim()) {
    throw ValidationError("targets have dim " + std::to_string(targets.dim()) +
                          ", sources have dim " + std::to_string(sources.dim()));
  }
  const SourceHull hull(sources);
  std::vector<Membership> out(targets.rows());
  parallel_for(targets.rows(), [&](std::size_t i) {
    const auto y = targets.row_as_double(i);
    out[i] = hull.membership(y, opts);
  });
  return out;
}

std::vector<double> probe_direction(Seed seed, std::size_t index, std::size_t dim) {
  const std::uint64_t key = derive(seed, index).value;
  std::vector<double> h(dim);
  double norm2 = 0.0;
  // A zero Gaussian vector has probability 0; redraw on the next counter block if it happens.
  for (std::uint64_t block = 0; norm2 == 0.0; ++block) {
    for (std::size_t k = 0; k < dim; ++k) {
      h[k] = counter_normal(key, block * dim + k);
      norm2 += h[k] * h[k];
    }
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : h) v *= inv;
  return h;
}

ProbeReport probe_condition(const EmbeddingMatrix& targets, const EmbeddingMatrix& sources,
                            std::size_t n_dirs, Seed seed, double tol) {
  if (targets.dim() != sources.dim()) {
    throw ValidationError("targets have dim " + std::to_string(targets.dim()) +
                          ", sources have dim " + std::to_string(sources.dim()));
  }
  if (n_dirs < 1) throw ValidationError("n_dirs must be >= 1");

  const std::size_t dim = sources.dim();
  const Eigen::MatrixXd src = sources.to_eigen();
  const Eigen::MatrixXd tgt = targets.to_eigen();

  constexpr std::size_t kChunk = 512;
  const std::size_t chunks = (n_dirs + kChunk - 1) / kChunk;
  std::vector<double> margins(n_dirs);
  std::vector<Index> best_rows(n_dirs);

  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t count = std::min(kChunk, n_dirs - begin);
    Eigen::MatrixXd dirs(static_cast<Index>(dim), static_cast<Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
      const auto h = probe_direction(seed, begin + k, dim);
      dirs.col(static_cast<Index>(k)) = to_vector(h);
    }
    const Eigen::MatrixXd src_scores = src * dirs;
    const Eigen::MatrixXd tgt_scores = tgt * dirs;
    for (std::size_t k = 0; k < count; ++k) {
      Index row = 0;
      const double tmax = tgt_scores.col(static_cast<Index>(k)).maxCoeff(&row);
      margins[begin + k] = tmax - src_scores.col(static_cast<Index>(k)).maxCoeff();
      best_rows[begin + k] = row;
    }
  });

  ProbeReport report;
  report.directions = n_dirs;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t k = 0; k < n_dirs; ++k) {
    if (margins[k] > tol) ++report.violations;
    if (margins[k] > report.worst_margin) {
      report.worst_margin = margins[k];
      worst = k;
    }
  }
  report.worst_direction = probe_direction(seed, worst, dim);
  report.worst_target_row = static_cast<std::size_t>(best_rows[worst]);
  return report;
}

}  // namespace vocabhull::hull
