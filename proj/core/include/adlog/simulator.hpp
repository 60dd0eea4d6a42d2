#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "adlog/scenario.hpp"
#include "adlog/trace_event.hpp"

namespace adlog {

struct TraceLog {
  std::vector<TraceEvent> events;  // non-decreasing time
  bool attack_present = false;
  std::optional<HiddenChannel> ground_truth;
};

inline constexpr std::int64_t kMaxPacketId = 2147483647;
inline constexpr std::int64_t kArpSize = 28;
inline constexpr std::int64_t kAckSize = 40;

// Deterministic packet scheduler emitting enqueue/dequeue/receive events for
// every packet of every flow, plus an ARP request/reply per flow start when
// control packets are enabled and an "ack" for every TCP or HTTP data packet.
// A zero duration yields an empty log.
TraceLog simulate(const Topology& topology, std::uint64_t seed, double duration);

// Number of data packets a flow emits over `active` seconds.
std::int64_t packets_for(const FlowSpec& flow, double active);

void write_trace(const TraceLog& log, std::ostream& out);

}  // namespace adlog
