#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adlog/trace_event.hpp"

namespace adlog {

// Maps a trace event to a fixed number of text tokens. Timestamps and packet
// ids are noise for the model and never appear in tokens.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::vector<std::string> tokenize(const TraceEvent& event) const = 0;
  virtual std::size_t arity() const = 0;

  // Slot positions of the endpoint tokens, if the tokenizer emits them.
  virtual std::optional<std::size_t> source_slot() const { return std::nullopt; }
  virtual std::optional<std::size_t> destination_slot() const { return std::nullopt; }
};

// (kind, from, to, protocol, seq, flags), e.g. ["r","n2","n14","udp","s3","-------"].
class FieldTupleTokenizer final : public Tokenizer {
 public:
  // When `seq_bucket` is set, sequence numbers are reduced modulo it.
  explicit FieldTupleTokenizer(std::optional<std::int64_t> seq_bucket = std::nullopt);

  std::vector<std::string> tokenize(const TraceEvent& event) const override;
  std::size_t arity() const override { return 6; }
  std::optional<std::size_t> source_slot() const override { return 1; }
  std::optional<std::size_t> destination_slot() const override { return 2; }

 private:
  std::optional<std::int64_t> seq_bucket_;
};

std::string node_token(NodeId node);
// Inverse of node_token; nullopt for anything else.
std::optional<NodeId> parse_node_token(const std::string& token);

// Protocol context label used for context splitting ("cbr" counts as udp,
// "ack" as tcp).
std::string protocol_context(const std::string& protocol);

}  // namespace adlog
