#include "vocabhull/vocab.hpp"

#include <limits>

#include "vocabhull/error.hpp"

namespace vocabhull {

Vocab::Vocab(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size());
  index_.reserve(tokens.size());
  for (auto& t : tokens) add(std::move(t));
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::add(std::string token) {
  if (tokens_.size() >= std::numeric_limits<TokenId>::max()) {
    throw ValidationError("vocabulary too large");
  }
  const auto id = static_cast<TokenId>(tokens_.size());
  auto [it, inserted] = index_.emplace(token, id);
  if (!inserted) {
    throw ValidationError("duplicate token at index " + std::to_string(id) +
                          " (first seen at " + std::to_string(it->second) + ")");
  }
  tokens_.push_back(std::move(token));
  return id;
}

}  // namespace vocabhull
