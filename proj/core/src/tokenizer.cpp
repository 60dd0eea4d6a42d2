#include "adlog/tokenizer.hpp"

#include <charconv>

#include <fmt/format.h>

namespace adlog {

FieldTupleTokenizer::FieldTupleTokenizer(std::optional<std::int64_t> seq_bucket)
    : seq_bucket_(seq_bucket) {}

std::vector<std::string> FieldTupleTokenizer::tokenize(const TraceEvent& e) const {
  std::int64_t seq = e.seq;
  if (seq_bucket_ && *seq_bucket_ > 0) seq %= *seq_bucket_;
  return {std::string(1, static_cast<char>(e.kind)),
          node_token(e.from),
          node_token(e.to),
          e.protocol,
          fmt::format("s{}", seq),
          e.flags};
}

std::string node_token(NodeId node) { return fmt::format("n{}", node.value); }

std::optional<NodeId> parse_node_token(const std::string& token) {
  if (token.size() < 2 || token[0] != 'n') return std::nullopt;
  std::uint32_t value = 0;
  const char* first = token.data() + 1;
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return NodeId(value);
}

std::string protocol_context(const std::string& protocol) {
  if (protocol == "cbr") return "udp";
  if (protocol == "ack") return "tcp";
  return protocol;
}

}  // namespace adlog
