#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adlog/types.hpp"

namespace adlog {

inline constexpr TokenId kSos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kUnk = 2;
inline constexpr std::size_t kReservedTokens = 3;

// Token <-> dense index bijection. Indices 0..2 are SOS, EOS and UNK; other
// tokens follow in first-occurrence order.
class Vocabulary {
 public:
  Vocabulary();

  // Returns the index of `token`, inserting it if new.
  TokenId add(const std::string& token);

  // UNK for unknown tokens.
  TokenId index_of(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  // Rebuilds from an index-ordered list; the list must start with the
  // reserved tokens and contain no duplicates.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

inline const char* const kSosToken = "<SOS>";
inline const char* const kEosToken = "<EOS>";
inline const char* const kUnkToken = "<UNK>";

Vocabulary build_vocabulary(std::span<const std::string> stream);

}  // namespace adlog
