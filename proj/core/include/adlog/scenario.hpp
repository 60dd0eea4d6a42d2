#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adlog/types.hpp"

namespace adlog {

enum class Protocol { kUdp, kTcp, kHttp };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& name);

struct FlowSpec {
  NodeId src;
  NodeId dst;
  Protocol protocol = Protocol::kUdp;
  std::int64_t packet_size = 1500;  // bytes
  double rate = 1e6;                // bits per second
  double start_time = 0.0;          // seconds
  std::optional<double> stop_time;  // defaults to the simulation duration
};

// Out-of-band link between two collaborators in different gateways. Traffic
// sourced at `pair.first` whose destination appears in `redirect` is
// delivered to the mapped collaborator instead of the declared server.
struct HiddenChannel {
  std::pair<NodeId, NodeId> pair;
  std::map<NodeId, NodeId> redirect;

  friend bool operator==(const HiddenChannel&, const HiddenChannel&) = default;
};

struct LinkSpec {
  double bandwidth = 10e6;  // bits per second
  double delay = 0.010;     // seconds
};

// Structured scenario file. JSON schema:
//   nodes: int, gateways: [[node...], ...], flows: [{src, dst, protocol,
//   packet_size, rate, start, stop?}], hidden_pair?: [a, b],
//   redirect?: {"<dst>": collaborator}, seed, duration, jitter?,
//   control_packets?, link?: {bandwidth, delay}
struct ScenarioConfig {
  std::uint32_t nodes = 0;
  std::vector<std::vector<NodeId>> gateways;
  std::vector<FlowSpec> flows;
  std::optional<std::pair<NodeId, NodeId>> hidden_pair;
  std::map<NodeId, NodeId> redirect;
  std::uint64_t seed = 1;
  double duration = 1.0;
  double jitter = 0.01;  // each inter-packet gap is scaled by 1 + U(-jitter, jitter)
  bool control_packets = true;
  LinkSpec link;
};

using GatewayMap = std::map<NodeId, std::size_t>;

struct Topology {
  std::uint32_t node_count = 0;
  GatewayMap gateway_of;
  std::vector<FlowSpec> flows;
  std::optional<HiddenChannel> hidden;
  LinkSpec link;
  double jitter = 0.0;
  bool control_packets = true;

  bool same_gateway(NodeId a, NodeId b) const;
};

// Validates the config and resolves the hidden channel. Throws ConfigError.
Topology build_topology(const ScenarioConfig& config);

// The 16-node, two-gateway layout with the eight UDP data flows; the hidden
// pair (14, 15) is set only when `with_hidden_pair` is true.
ScenarioConfig reference_scenario(bool with_hidden_pair, double duration);

// Keys present in `j` override `base`. Giving "nodes" replaces the whole
// topology (gateways, flows, hidden pair, redirect).
ScenarioConfig scenario_from_json(const nlohmann::json& j, const ScenarioConfig& base = {});
nlohmann::json scenario_to_json(const ScenarioConfig& config);

}  // namespace adlog
