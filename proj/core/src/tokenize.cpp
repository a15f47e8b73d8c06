#include "vocabhull/tokenize.hpp"

#include <algorithm>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "vocabhull/error.hpp"
#include "vocabhull/parallel.hpp"

namespace vocabhull::tokenize {

namespace {

constexpr std::string_view kByteLevelSpace = "\xC4\xA0";      // U+0120
constexpr std::string_view kSentencePieceSpace = "\xE2\x96\x81";  // U+2581

bool valid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  const auto len = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) return false;
  }
  return true;
}

std::string nfkc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw NumericError("ICU NFKC normalizer unavailable");
  const icu::UnicodeString src =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) throw ValidationError("NFKC normalisation failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

bool all_space(std::string_view s) { return std::all_of(s.begin(), s.end(), is_space); }

}  // namespace

std::string canonicalize(std::string_view text) {
  std::string out = valid_utf8(text) ? nfkc(text) : std::string(text);
  replace_all(out, kByteLevelSpace, kSpace);
  replace_all(out, kSentencePieceSpace, kSpace);
  return out;
}

Vocab MergedVocab::merged() const {
  Vocab v = source;
  for (const auto& t : added.tokens()) v.add(t);
  return v;
}

MergedVocab fuzzy_match(const Vocab& source, const Vocab& target) {
  std::unordered_map<std::string, TokenId> canonical_source;
  canonical_source.reserve(source.size());
  for (TokenId id = 0; id < source.size(); ++id) {
    canonical_source.emplace(canonicalize(source.at(id)), id);
  }

  MergedVocab merged;
  merged.source = source;
  for (const auto& token : target.tokens()) {
    auto it = canonical_source.find(canonicalize(token));
    if (it != canonical_source.end()) {
      merged.copied.emplace_back(token, it->second);
    } else {
      merged.added.add(token);
    }
  }
  return merged;
}

LongestMatchTokenizer::LongestMatchTokenizer(const Vocab& vocab) : vocab_size_(vocab.size()) {
  pieces_.reserve(vocab.size() + 256);
  lookup_.reserve(vocab.size() + 256);
  for (TokenId id = 0; id < vocab.size(); ++id) {
    std::string piece = canonicalize(vocab.at(id));
    if (!piece.empty()) {
      lookup_.emplace(piece, id);
      max_piece_bytes_ = std::max(max_piece_bytes_, piece.size());
    }
    pieces_.push_back(std::move(piece));
  }
  for (int b = 0; b < 256; ++b) {
    std::string byte(1, static_cast<char>(b));
    if (lookup_.contains(byte)) continue;
    const auto id = static_cast<TokenId>(pieces_.size());
    lookup_.emplace(byte, id);
    pieces_.push_back(std::move(byte));
  }
}

std::vector<TokenId> LongestMatchTokenizer::encode(std::string_view text) const {
  const std::string canon = canonicalize(text);
  std::vector<TokenId> ids;
  std::string key;
  std::size_t pos = 0;
  while (pos < canon.size()) {
    const std::size_t longest = std::min(max_piece_bytes_, canon.size() - pos);
    for (std::size_t len = longest; len >= 1; --len) {
      key.assign(canon, pos, len);
      auto it = lookup_.find(key);
      if (it != lookup_.end()) {
        ids.push_back(it->second);
        pos += len;
        break;
      }
    }
  }
  return ids;
}

std::vector<TokenId> longest_match_tokenize(std::string_view text, const Vocab& vocab) {
  return LongestMatchTokenizer(vocab).encode(text);
}

FertilityReport fertility(std::span<const std::string> lines, const LongestMatchTokenizer& tok) {
  std::vector<std::size_t> words(lines.size());
  std::vector<std::size_t> tokens(lines.size());
  parallel_for(lines.size(), [&](std::size_t i) {
    const std::string canon = canonicalize(lines[i]);
    words[i] = count_words(canon);
    std::size_t count = 0;
    for (TokenId id : tok.encode(std::string(kSpace) + canon)) {
      if (!all_space(tok.piece(id))) ++count;
    }
    tokens[i] = count;
  }, 64);

  FertilityReport r;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    r.word_count += words[i];
    r.token_count += tokens[i];
  }
  if (r.word_count == 0) throw ValidationError("fertility: corpus has no words");
  r.tokens_per_word = static_cast<double>(r.token_count) / static_cast<double>(r.word_count);
  return r;
}

FertilityReport fertility(std::span<const std::string> lines, const Vocab& vocab) {
  return fertility(lines, LongestMatchTokenizer(vocab));
}

}  // namespace vocabhull::tokenize
