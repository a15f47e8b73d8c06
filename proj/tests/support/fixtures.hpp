#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vocabhull/cw2v.hpp"
#include "vocabhull/matrix.hpp"
#include "vocabhull/vocab.hpp"

namespace vocabhull::testing {

EmbeddingMatrix gaussian_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                double stddev = 1.0);

// Source head with tiny rows, so that Normal(0, 0.02) target rows dominate
// its logits.
EmbeddingMatrix adversarial_source_head();
inline constexpr std::size_t kAdversarialTargets = 8;

// Two frozen sources and two targets; the first target only ever appears
// next to source 0, the second next to source 1.
struct PlantedToy {
  EmbeddingMatrix input;
  EmbeddingMatrix head;
  std::vector<cw2v::Sentence> corpus;
  std::vector<cw2v::DictEntry> dict;
  std::size_t n_target = 2;
  TokenId target = 2;
  TokenId partner = 0;
};
PlantedToy planted_toy(std::size_t sentences_per_pair = 200);

struct FertilityFixture {
  Vocab source;  // English-like subwords with SentencePiece markers
  Vocab target;  // Devanagari words plus a few byte-level duplicates of source tokens
  std::vector<std::string> target_corpus;   // only target-language words
  std::vector<std::string> english_corpus;  // only source-vocabulary words
};
FertilityFixture fertility_fixture();

}  // namespace vocabhull::testing
