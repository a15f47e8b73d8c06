#pragma once

#include <random>

#include "vocabhull/matrix.hpp"

namespace bench {

inline vocabhull::EmbeddingMatrix gaussian(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(rows * dim);
  for (float& v : data) v = normal(rng);
  return vocabhull::EmbeddingMatrix(rows, dim, std::move(data));
}

}  // namespace bench
