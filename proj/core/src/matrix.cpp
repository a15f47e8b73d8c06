#include "vocabhull/matrix.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "vocabhull/error.hpp"

namespace vocabhull {

namespace {

void check_shape(std::size_t rows, std::size_t dim) {
  if (rows == 0 || dim == 0) {
    throw ValidationError("embedding matrix must have rows >= 1 and dim >= 1, got " +
                          std::to_string(rows) + "x" + std::to_string(dim));
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_() {
  check_shape(rows, dim);
  data_.assign(rows * dim, 0.0f);
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  check_shape(rows, dim);
  if (data_.size() != rows * dim) {
    throw ValidationError("embedding data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(rows) + "x" +
                          std::to_string(dim));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError("non-finite embedding entry at row " + std::to_string(i / dim) +
                         ", column " + std::to_string(i % dim));
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::from_eigen(const Eigen::MatrixXd& m) {
  std::vector<float> data(static_cast<std::size_t>(m.rows() * m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      data[static_cast<std::size_t>(i * m.cols() + k)] = static_cast<float>(m(i, k));
    }
  }
  return EmbeddingMatrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                         std::move(data));
}

EmbeddingMatrix EmbeddingMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("from_rows: no rows");
  const std::size_t dim = rows.front().size();
  std::vector<float> data;
  data.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw ValidationError("from_rows: ragged rows");
    for (double v : r) data.push_back(static_cast<float>(v));
  }
  return EmbeddingMatrix(rows.size(), dim, std::move(data));
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::span<float> EmbeddingMatrix::row(std::size_t i) {
  return std::span<float>(data_).subspan(i * dim_, dim_);
}

Eigen::MatrixXd EmbeddingMatrix::to_eigen() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = data_[i * dim_ + k];
    }
  }
  return m;
}

std::vector<double> EmbeddingMatrix::row_as_double(std::size_t i) const {
  auto r = row(i);
  return {r.begin(), r.end()};
}

bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  return a.rows_ == b.rows_ && a.dim_ == b.dim_ &&
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

EmbeddingMatrix concat_rows(const EmbeddingMatrix& top, const EmbeddingMatrix& bottom) {
  if (top.dim() != bottom.dim()) {
    throw ValidationError("concat_rows: dim mismatch " + std::to_string(top.dim()) + " vs " +
                          std::to_string(bottom.dim()));
  }
  std::vector<float> data(top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return EmbeddingMatrix(top.rows() + bottom.rows(), top.dim(), std::move(data));
}

EmbeddingMatrix slice_rows(const EmbeddingMatrix& m, std::size_t begin, std::size_t end) {
  if (begin >= end || end > m.rows()) {
    throw ValidationError("slice_rows: bad range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") for " + std::to_string(m.rows()) + " rows");
  }
  auto first = m.data().begin() + static_cast<std::ptrdiff_t>(begin * m.dim());
  auto last = m.data().begin() + static_cast<std::ptrdiff_t>(end * m.dim());
  return EmbeddingMatrix(end - begin, m.dim(), std::vector<float>(first, last));
}

double dot(std::span<const double> h, std::span<const float> row) {
  double acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) acc += h[k] * static_cast<double>(row[k]);
  return acc;
}

std::vector<double> logits(std::span<const double> h, const EmbeddingMatrix& m) {
  if (h.size() != m.dim()) {
    throw ValidationError("logits: hidden state has dim " + std::to_string(h.size()) +
                          ", matrix has dim " + std::to_string(m.dim()));
  }
  std::vector<double> out(m.rows());
  for (std::size_t j = 0; j < m.rows(); ++j) out[j] = dot(h, m.row(j));
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ValidationError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

}  // namespace vocabhull
