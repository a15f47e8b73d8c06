#include "support/fixtures.hpp"

#include <random>

namespace vocabhull::testing {

EmbeddingMatrix gaussian_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<float> data(rows * dim);
  for (float& v : data) v = static_cast<float>(normal(rng));
  return EmbeddingMatrix(rows, dim, std::move(data));
}

EmbeddingMatrix adversarial_source_head() { return gaussian_matrix(8, 4, 0xad5e, 0.01); }

PlantedToy planted_toy(std::size_t sentences_per_pair) {
  PlantedToy toy{EmbeddingMatrix(2, 2, {2.0f, 0.0f, 0.0f, 2.0f}),
                 EmbeddingMatrix(2, 2, {2.0f, 0.0f, 0.0f, 2.0f}),
                 {},
                 {},
                 2,
                 2,
                 0};
  for (std::size_t i = 0; i < sentences_per_pair; ++i) {
    toy.corpus.push_back({0, 2});
    toy.corpus.push_back({3, 1});
  }
  toy.dict.push_back({0, 2});
  return toy;
}

FertilityFixture fertility_fixture() {
  FertilityFixture f;
  for (const char* t : {"\xE2\x96\x81" "the", "\xE2\x96\x81" "cat", "\xE2\x96\x81" "sat", "\xE2\x96\x81" "on",
                        "\xE2\x96\x81" "mat", "\xE2\x96\x81" "a", "\xE2\x96\x81" "dog", "ing", "s"}) {
    f.source.add(t);
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    if (c != 's') f.source.add(std::string(1, c));
  }

  // Byte-level duplicates of source tokens, then new Devanagari words.
  for (const char* t : {"\xC4\xA0" "the", "\xC4\xA0" "cat",
                        "\xE2\x96\x81\xE0\xA4\xA8\xE0\xA4\xAE\xE0\xA4\xB8\xE0\xA5\x8D\xE0\xA4\xA4\xE0\xA5\x87",
                        "\xE2\x96\x81\xE0\xA4\xA6\xE0\xA5\x81\xE0\xA4\xA8\xE0\xA4\xBF\xE0\xA4\xAF\xE0\xA4\xBE",
                        "\xE2\x96\x81\xE0\xA4\xAD\xE0\xA4\xBE\xE0\xA4\xB0\xE0\xA4\xA4",
                        "\xE2\x96\x81\xE0\xA4\xAA\xE0\xA4\xBE\xE0\xA4\xA8\xE0\xA5\x80"}) {
    f.target.add(t);
  }

  f.target_corpus = {
      "\xE0\xA4\xA8\xE0\xA4\xAE\xE0\xA4\xB8\xE0\xA5\x8D\xE0\xA4\xA4\xE0\xA5\x87 "
      "\xE0\xA4\xA6\xE0\xA5\x81\xE0\xA4\xA8\xE0\xA4\xBF\xE0\xA4\xAF\xE0\xA4\xBE",
      "\xE0\xA4\xAD\xE0\xA4\xBE\xE0\xA4\xB0\xE0\xA4\xA4 \xE0\xA4\xAA\xE0\xA4\xBE\xE0\xA4\xA8\xE0\xA5\x80 "
      "\xE0\xA4\xA8\xE0\xA4\xAE\xE0\xA4\xB8\xE0\xA5\x8D\xE0\xA4\xA4\xE0\xA5\x87",
      "\xE0\xA4\xAA\xE0\xA4\xBE\xE0\xA4\xA8\xE0\xA5\x80",
  };
  f.english_corpus = {"the cat sat on the mat", "a dog sits", "the cats sat on a dog mat",
                      "sitting dogs"};
  return f;
}

}  // namespace vocabhull::testing
