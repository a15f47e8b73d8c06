#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vocabhull/error.hpp"
#include "vocabhull/matrix.hpp"
#include "vocabhull/random.hpp"

namespace vocabhull::hull {

inline constexpr std::size_t kDefaultMaxIters = 5000;
inline constexpr double kDefaultTol = 1e-6;

// Thrown by separating_direction when the point is (numerically) inside.
class NoWitnessError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct ProjectionOptions {
  std::size_t max_iters = kDefaultMaxIters;
  // Absolute Euclidean distance. Embeddings are O(1) in practice; callers
  // working at other scales should rescale or pass their own tolerance.
  double tol = kDefaultTol;
  bool record_history = false;
};

// Simplex coordinates placing `projection` in the hull, and its distance to
// the query point.
struct HullCertificate {
  std::vector<double> weights;     // one per source row, >= 0, sum 1
  std::vector<double> projection;  // sum_j weights[j] * e_j
  double residual = 0.0;           // ||y - projection||_2
  std::size_t iterations = 0;
  bool converged = false;          // duality gap reached, or residual hit 0
  std::vector<double> residual_history;  // filled when record_history is set
};

struct Membership {
  bool inside = false;
  HullCertificate certificate;
};

// A unit normal n with n.y > max_j n.e_j.
struct SeparationWitness {
  std::vector<double> direction;
  double margin = 0.0;  // n.y - max_j n.e_j
  std::vector<double> projection;
};

struct ProbeReport {
  std::size_t directions = 0;
  std::size_t violations = 0;
  // max over directions of (max_t h.t - max_s h.s); negative means every
  // sampled direction has a source row strictly ahead.
  double worst_margin = 0.0;
  std::vector<double> worst_direction;
  std::size_t worst_target_row = 0;
};

// Source rows held in double for repeated projections.
class SourceHull {
 public:
  explicit SourceHull(const EmbeddingMatrix& sources);
  explicit SourceHull(Eigen::MatrixXd sources);

  std::size_t size() const noexcept { return static_cast<std::size_t>(sources_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(sources_.cols()); }
  const Eigen::MatrixXd& sources() const noexcept { return sources_; }

  HullCertificate project(std::span<const double> y, const ProjectionOptions& opts = {}) const;
  Membership membership(std::span<const double> y, const ProjectionOptions& opts = {}) const;
  SeparationWitness separating_direction(std::span<const double> y,
                                         const ProjectionOptions& opts = {}) const;

 private:
  Eigen::MatrixXd sources_;
  double scale2_;
};

// Euclidean projection of y onto conv(sources) by away-step Frank-Wolfe over
// the simplex with exact line search. The residual never increases between
// iterations.
HullCertificate project_to_hull(std::span<const double> y, const EmbeddingMatrix& sources,
                                std::size_t max_iters = kDefaultMaxIters,
                                double tol = kDefaultTol);

// inside <=> certificate.residual <= tol.
Membership membership(std::span<const double> y, const EmbeddingMatrix& sources,
                      double tol = kDefaultTol, std::size_t max_iters = kDefaultMaxIters);

// Normal of the hyperplane through the projection point. Throws
// NoWitnessError when y is within tol of the hull.
SeparationWitness separating_direction(std::span<const double> y, const EmbeddingMatrix& sources,
                                       const ProjectionOptions& opts = {});

// Membership of every row of `targets`, computed in parallel.
std::vector<Membership> membership_rows(const EmbeddingMatrix& targets,
                                        const EmbeddingMatrix& sources,
                                        const ProjectionOptions& opts = {});

// Monte-Carlo check of sup_t h.t <= sup_s h.s over n_dirs unit directions
// drawn uniformly from the sphere. A direction counts as a violation when
// the margin exceeds `tol`; with the default this matches the membership
// tolerance, since a point within tol of the hull cannot beat the sources by
// more than tol along a unit h. Deterministic for a given seed regardless of
// thread count.
ProbeReport probe_condition(const EmbeddingMatrix& targets, const EmbeddingMatrix& sources,
                            std::size_t n_dirs, Seed seed, double tol = kDefaultTol);

// Unit direction number `index` of the probe stream for `seed`.
std::vector<double> probe_direction(Seed seed, std::size_t index, std::size_t dim);

}  // namespace vocabhull::hull
