#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vocabhull {

using TokenId = std::uint32_t;

// Ordered list of unique tokens (exact byte comparison) with a reverse index.
class Vocab {
 public:
  Vocab() = default;
  // Throws ValidationError on the first duplicate token.
  explicit Vocab(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& at(TokenId id) const { return tokens_.at(id); }

  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Appends and returns the new id; throws on duplicates.
  TokenId add(std::string token);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace vocabhull
