#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vocabhull/vocab.hpp"

namespace vocabhull::tokenize {

// Canonical leading-space symbol. Both the byte-level BPE marker U+0120 and
// the SentencePiece marker U+2581 map to it.
inline constexpr std::string_view kSpace = " ";

// NFKC, then marker unification. Text that is not valid UTF-8 skips NFKC.
std::string canonicalize(std::string_view text);

struct MergedVocab {
  Vocab source;
  Vocab added;  // target tokens with no canonical match in source, in target order
  std::vector<std::pair<std::string, TokenId>> copied;  // target token -> source row

  // Source tokens followed by added tokens: the expanded vocabulary.
  Vocab merged() const;
};

// A target token is copied iff its canonical form equals the canonical form
// of some source token (the first such source row wins); otherwise it is added.
MergedVocab fuzzy_match(const Vocab& source, const Vocab& target);

// Greedy left-to-right longest match over canonicalised text. Single-byte
// tokens missing from the vocabulary are appended as ids [vocab.size(),
// size()), so every input byte is covered.
class LongestMatchTokenizer {
 public:
  explicit LongestMatchTokenizer(const Vocab& vocab);

  std::vector<TokenId> encode(std::string_view text) const;

  // Canonical form of a token; concatenating the pieces of encode(text)
  // reproduces canonicalize(text).
  const std::string& piece(TokenId id) const { return pieces_.at(id); }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t size() const noexcept { return pieces_.size(); }
  bool is_fallback(TokenId id) const noexcept { return id >= vocab_size_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, TokenId> lookup_;
  std::size_t vocab_size_;
  std::size_t max_piece_bytes_ = 1;
};

std::vector<TokenId> longest_match_tokenize(std::string_view text, const Vocab& vocab);

struct FertilityReport {
  double tokens_per_word = 0.0;
  std::size_t word_count = 0;
  std::size_t token_count = 0;
};

// Tokens per whitespace-delimited word. Each line gets a leading space (as a
// SentencePiece dummy prefix would), and tokens made only of whitespace are
// not counted. Throws ValidationError when the corpus has no words.
FertilityReport fertility(std::span<const std::string> lines, const Vocab& vocab);
FertilityReport fertility(std::span<const std::string> lines, const LongestMatchTokenizer& tok);

}  // namespace vocabhull::tokenize
