#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vocabhull/initializers.hpp"
#include "vocabhull/matrix.hpp"
#include "vocabhull/random.hpp"
#include "vocabhull/vocab.hpp"

// A toy autoregressive model: a fixed prefix encoder feeding greedy decoding
// over an LM head. The encoder stands in for a frozen network; the
// preservation results hold for any deterministic map from prefixes to
// hidden states.
namespace vocabhull::lmtoy {

// Maps a token sequence to a unit-norm Gaussian vector keyed by a seeded hash
// of the whole sequence.
class PrefixEncoder {
 public:
  PrefixEncoder(Seed seed, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::vector<double> encode(std::span<const TokenId> tokens) const;
  void encode_into(std::span<const TokenId> tokens, std::span<double> out) const;

 private:
  Seed seed_;
  std::size_t dim_;
};

struct DecodeTrace {
  std::vector<TokenId> prompt;
  std::vector<TokenId> generated;
  std::vector<double> max_logits;  // winning logit at each step
};

// Next token = argmax over the head's logits (lowest index on ties); the
// hidden state is recomputed from the full sequence at every step.
DecodeTrace greedy_decode(std::span<const TokenId> prompt, const EmbeddingMatrix& head,
                          const PrefixEncoder& encoder, std::size_t steps);

struct Divergence {
  std::size_t prompt_index = 0;
  std::size_t step = 0;
  TokenId source_token = 0;
  TokenId expanded_token = 0;
  bool target_row = false;  // expanded_token >= source boundary
};

struct PreservationReport {
  std::size_t prompts = 0;
  std::size_t matched = 0;
  double match_fraction = 0.0;
  std::vector<Divergence> divergences;  // first divergence of each mismatching prompt
};

// Prompt number `index` for a source vocabulary of n_source tokens: length
// uniform in [1, 8], tokens uniform over [0, n_source).
std::vector<TokenId> sample_prompt(Seed seed, std::size_t index, std::size_t n_source);

// Greedy traces over source_head vs expanded.lm_head for n_prompts random
// source-token prompts. Matching is exact token-id equality of full traces.
PreservationReport preservation_report(const EmbeddingMatrix& source_head,
                                       const ExpandedModel& expanded, std::size_t n_prompts,
                                       std::size_t steps, Seed seed);

// Same as preservation_report for several expansions of one source head,
// sharing the source-head decode.
std::vector<PreservationReport> preservation_reports(const EmbeddingMatrix& source_head,
                                                     std::span<const EmbeddingMatrix> expanded_heads,
                                                     std::size_t n_prompts, std::size_t steps,
                                                     Seed seed);

}  // namespace vocabhull::lmtoy
