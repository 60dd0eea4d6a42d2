#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "adlog/types.hpp"

namespace adlog {

enum class EventKind : char {
  kEnqueue = '+',
  kDequeue = '-',
  kReceive = 'r',
};

// `<node>.<port>` endpoint as printed in ns-2 traces.
struct Address {
  NodeId node;
  std::int32_t port = 0;

  friend bool operator==(const Address&, const Address&) = default;
};

// One line of an ns-2 trace:
//   <event> <time> <from> <to> <ptype> <size> <flags> <fid> <src> <dst> <seq> <pkt_id>
struct TraceEvent {
  EventKind kind = EventKind::kEnqueue;
  double time = 0.0;
  NodeId from;
  NodeId to;
  std::string protocol;
  std::int64_t size = 0;
  std::string flags = "-------";
  std::int64_t flow_id = 0;
  Address src;
  Address dst;
  std::int64_t seq = 0;
  std::int64_t pkt_id = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline constexpr std::size_t kFlagsWidth = 7;
inline constexpr std::size_t kTraceFieldCount = 12;

// Throws ParseError (with the 1-based column of the bad field).
TraceEvent parse_trace_line(std::string_view line);

// Time is printed with exactly six decimals.
std::string format_trace_line(const TraceEvent& event);

// Reads every non-blank line; ParseError carries the 1-based line number.
std::vector<TraceEvent> read_trace(std::istream& in);
std::vector<TraceEvent> read_trace_file(const std::string& path);

}  // namespace adlog
