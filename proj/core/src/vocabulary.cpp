#include "adlog/vocabulary.hpp"

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {

Vocabulary::Vocabulary() {
  add(kSosToken);
  add(kEosToken);
  add(kUnkToken);
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

TokenId Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return index_.contains(token); }

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw Error(fmt::format("token index {} out of range", id));
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(index_of(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return out;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kReservedTokens || tokens[kSos] != kSosToken || tokens[kEos] != kEosToken ||
      tokens[kUnk] != kUnkToken) {
    throw FormatError("vocabulary must start with the reserved tokens");
  }
  Vocabulary v;
  for (std::size_t i = kReservedTokens; i < tokens.size(); ++i) {
    if (v.add(tokens[i]) != i) {
      throw FormatError(fmt::format("duplicate vocabulary token '{}'", tokens[i]));
    }
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const std::string> stream) {
  Vocabulary v;
  for (const auto& t : stream) v.add(t);
  return v;
}

}  // namespace adlog
