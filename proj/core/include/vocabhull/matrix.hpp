#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vocabhull {

// Dense rows x dim embedding matrix, one row per vocabulary item.
//
// Values are stored as 32-bit floats (the on-disk precision); every
// reduction over them is carried out in double. A constructed matrix is
// always non-empty and finite.
class EmbeddingMatrix {
 public:
  // Zero-filled matrix.
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  // Rounds each entry to float. Throws NumericError on non-finite input.
  static EmbeddingMatrix from_eigen(const Eigen::MatrixXd& m);
  static EmbeddingMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const;
  std::span<float> row(std::size_t i);

  float operator()(std::size_t i, std::size_t k) const { return data_[i * dim_ + k]; }

  Eigen::MatrixXd to_eigen() const;
  std::vector<double> row_as_double(std::size_t i) const;

  // Bytewise equality of shape and payload.
  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<float> data_;
};

// Stacks `top` over `bottom` along the vocabulary axis.
EmbeddingMatrix concat_rows(const EmbeddingMatrix& top, const EmbeddingMatrix& bottom);

// Copy of rows [begin, end).
EmbeddingMatrix slice_rows(const EmbeddingMatrix& m, std::size_t begin, std::size_t end);

double dot(std::span<const double> h, std::span<const float> row);

// out[j] = h . row_j, accumulated in double. Throws ValidationError on a
// dimension mismatch.
std::vector<double> logits(std::span<const double> h, const EmbeddingMatrix& m);

// Index of the maximum; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace vocabhull
