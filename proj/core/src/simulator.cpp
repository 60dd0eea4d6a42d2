#include "adlog/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <random>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {
namespace {

using Micros = std::int64_t;

Micros to_micros(double seconds) { return std::llround(seconds * 1e6); }
double to_seconds(Micros us) { return static_cast<double>(us) / 1e6; }

enum class PacketRole { kData, kAck, kArpRequest, kArpReply };

struct Packet {
  PacketRole role = PacketRole::kData;
  NodeId src;
  NodeId dst;  // after redirection
  std::string ptype;
  std::int64_t size = 0;
  std::string flags = "-------";
  std::int64_t flow_id = 0;
  std::int64_t seq = 0;
};

struct Send {
  Micros time = 0;
  std::uint64_t order = 0;
  Packet packet;
};

struct SendLater {
  bool operator()(const Send& a, const Send& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.order > b.order;
  }
};

struct Emitted {
  Micros time;
  std::uint64_t order;
  TraceEvent event;
};

NodeId resolve_destination(const Topology& topo, NodeId src, NodeId dst) {
  if (!topo.hidden || src != topo.hidden->pair.first) return dst;
  auto it = topo.hidden->redirect.find(dst);
  return it == topo.hidden->redirect.end() ? dst : it->second;
}

}  // namespace

std::int64_t packets_for(const FlowSpec& flow, double active) {
  if (active <= 0.0) return 0;
  const double bits = static_cast<double>(flow.packet_size) * 8.0;
  const double count = flow.rate * static_cast<double>(to_micros(active)) / (bits * 1e6);
  return static_cast<std::int64_t>(std::floor(count + 1e-9));
}

TraceLog simulate(const Topology& topo, std::uint64_t seed, double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw SimulationError("duration must be finite and non-negative");
  }

  std::priority_queue<Send, std::vector<Send>, SendLater> pending;
  std::uint64_t order = 0;
  const Micros horizon = to_micros(duration);

  for (std::size_t fi = 0; fi < topo.flows.size(); ++fi) {
    const FlowSpec& flow = topo.flows[fi];
    const auto flow_id = static_cast<std::int64_t>(fi + 1);
    const Micros start = to_micros(flow.start_time);
    const Micros stop = std::min(horizon, flow.stop_time ? to_micros(*flow.stop_time) : horizon);
    if (start >= stop) continue;
    const NodeId dst = resolve_destination(topo, flow.src, flow.dst);

    if (topo.control_packets) {
      Packet arp{PacketRole::kArpRequest, flow.src, dst, "arp", kArpSize, "-------", flow_id, 0};
      pending.push({start, order++, arp});
    }

    const std::int64_t n = packets_for(flow, to_seconds(stop - start));
    const double gap_us = static_cast<double>(flow.packet_size) * 8.0 * 1e6 / flow.rate;
    std::seed_seq seq_seed{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(fi)};
    std::mt19937_64 rng(seq_seed);
    std::uniform_real_distribution<double> jitter(-topo.jitter, topo.jitter);
    double drift_us = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      if (k > 0 && topo.jitter > 0.0) drift_us += jitter(rng) * gap_us;
      Micros t = start + std::llround(static_cast<double>(k) * gap_us + drift_us);
      t = std::clamp(t, start, stop - 1);
      Packet data{PacketRole::kData, flow.src, dst, to_string(flow.protocol), flow.packet_size,
                  "-------", flow_id, k};
      pending.push({t, order++, data});
    }
  }

  std::map<std::pair<NodeId, NodeId>, Micros> link_free;
  const double link_bw = topo.link.bandwidth;
  const Micros delay = to_micros(topo.link.delay);
  std::vector<Emitted> emitted;
  std::uint64_t emit_order = 0;
  std::int64_t next_pkt_id = 0;

  while (!pending.empty()) {
    Send s = pending.top();
    pending.pop();
    if (next_pkt_id > kMaxPacketId) {
      throw SimulationError(fmt::format("packet id counter overflow after {} packets",
                                        next_pkt_id));
    }
    const Packet& p = s.packet;
    TraceEvent ev;
    ev.from = p.src;
    ev.to = p.dst;
    ev.protocol = p.ptype;
    ev.size = p.size;
    ev.flags = p.flags;
    ev.flow_id = p.flow_id;
    ev.src = {p.src, 0};
    ev.dst = {p.dst, 0};
    ev.seq = p.seq;
    ev.pkt_id = next_pkt_id++;

    Micros& free_at = link_free[{p.src, p.dst}];
    const Micros tx = std::llround(static_cast<double>(p.size) * 8.0 * 1e6 / link_bw);
    const Micros dequeue = std::max(s.time, free_at);
    free_at = dequeue + tx;
    const Micros receive = dequeue + tx + delay;

    ev.kind = EventKind::kEnqueue;
    ev.time = to_seconds(s.time);
    emitted.push_back({s.time, emit_order++, ev});
    ev.kind = EventKind::kDequeue;
    ev.time = to_seconds(dequeue);
    emitted.push_back({dequeue, emit_order++, ev});
    ev.kind = EventKind::kReceive;
    ev.time = to_seconds(receive);
    emitted.push_back({receive, emit_order++, ev});

    if (p.role == PacketRole::kArpRequest) {
      Packet reply{PacketRole::kArpReply, p.dst, p.src, "arp", kArpSize, "-------", p.flow_id, 0};
      pending.push({receive, order++, reply});
    } else if (p.role == PacketRole::kData && p.ptype != "udp") {
      Packet ack{PacketRole::kAck, p.dst, p.src, "ack", kAckSize, "---A---", p.flow_id, p.seq};
      pending.push({receive, order++, ack});
    }
  }

  std::stable_sort(emitted.begin(), emitted.end(), [](const Emitted& a, const Emitted& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.order < b.order;
  });

  TraceLog log;
  log.events.reserve(emitted.size());
  for (auto& e : emitted) log.events.push_back(std::move(e.event));
  log.attack_present = topo.hidden.has_value();
  log.ground_truth = topo.hidden;
  return log;
}

void write_trace(const TraceLog& log, std::ostream& out) {
  for (const TraceEvent& e : log.events) {
    out << format_trace_line(e) << '\n';
    if (!out) throw Error("trace sink write failed");
  }
  out.flush();
  if (!out) throw Error("trace sink write failed");
}

}  // namespace adlog
