#include "adlog/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "adlog/error.hpp"

namespace adlog {

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::kUdp:
      return "udp";
    case Protocol::kTcp:
      return "tcp";
    case Protocol::kHttp:
      return "http";
  }
  return "udp";
}

Protocol protocol_from_string(const std::string& name) {
  if (name == "udp" || name == "UDP") return Protocol::kUdp;
  if (name == "tcp" || name == "TCP") return Protocol::kTcp;
  if (name == "http" || name == "HTTP") return Protocol::kHttp;
  throw ConfigError(fmt::format("unknown protocol '{}'", name));
}

bool Topology::same_gateway(NodeId a, NodeId b) const {
  return gateway_of.at(a) == gateway_of.at(b);
}

Topology build_topology(const ScenarioConfig& config) {
  if (config.nodes < 2) throw ConfigError("a scenario needs at least 2 nodes");
  if (!(config.jitter >= 0.0 && config.jitter < 0.5)) {
    throw ConfigError("jitter must lie in [0, 0.5)");
  }
  if (!(config.link.bandwidth > 0.0) || !(config.link.delay >= 0.0)) {
    throw ConfigError("link bandwidth must be positive and delay non-negative");
  }

  Topology topo;
  topo.node_count = config.nodes;
  topo.link = config.link;
  topo.jitter = config.jitter;
  topo.control_packets = config.control_packets;

  auto check_node = [&](NodeId n, const char* what) {
    if (n.value >= config.nodes) {
      throw ConfigError(fmt::format("{} references unknown node {}", what, n.value));
    }
  };

  for (std::size_t g = 0; g < config.gateways.size(); ++g) {
    for (NodeId n : config.gateways[g]) {
      check_node(n, "gateway list");
      if (!topo.gateway_of.emplace(n, g).second) {
        throw ConfigError(fmt::format("node {} assigned to more than one gateway", n.value));
      }
    }
  }
  if (config.gateways.empty()) {
    for (std::uint32_t n = 0; n < config.nodes; ++n) topo.gateway_of.emplace(NodeId(n), 0);
  }
  if (topo.gateway_of.size() != config.nodes) {
    throw ConfigError("every node must belong to exactly one gateway");
  }

  for (const FlowSpec& f : config.flows) {
    check_node(f.src, "flow source");
    check_node(f.dst, "flow destination");
    if (f.src == f.dst) throw ConfigError(fmt::format("flow {} -> itself", f.src.value));
    if (f.packet_size <= 0) throw ConfigError("packet_size must be positive");
    if (!(f.rate > 0.0)) throw ConfigError("rate must be positive");
    if (!(f.start_time >= 0.0)) throw ConfigError("start time must be non-negative");
    if (f.stop_time && !(f.start_time < *f.stop_time)) {
      throw ConfigError(fmt::format("flow {} -> {}: start must precede stop", f.src.value,
                                    f.dst.value));
    }
    topo.flows.push_back(f);
  }

  if (config.hidden_pair) {
    auto [a, b] = *config.hidden_pair;
    check_node(a, "hidden pair");
    check_node(b, "hidden pair");
    if (a == b || topo.same_gateway(a, b)) {
      throw ConfigError(fmt::format("hidden pair ({}, {}) must span two gateways", a.value,
                                    b.value));
    }
    HiddenChannel hc;
    hc.pair = {a, b};
    if (!config.redirect.empty()) {
      for (auto [from, to] : config.redirect) {
        check_node(from, "redirect");
        check_node(to, "redirect");
        hc.redirect.emplace(from, to);
      }
    } else {
      for (const FlowSpec& f : topo.flows) {
        if (f.src == a && f.dst != b) hc.redirect.emplace(f.dst, b);
      }
    }
    topo.hidden = std::move(hc);
  } else if (!config.redirect.empty()) {
    throw ConfigError("redirect given without hidden_pair");
  }
  return topo;
}

ScenarioConfig reference_scenario(bool with_hidden_pair, double duration) {
  ScenarioConfig c;
  c.nodes = 16;
  c.gateways.resize(2);
  for (std::uint32_t n = 0; n < 16; ++n) c.gateways[n % 2].push_back(NodeId(n));
  const std::pair<std::uint32_t, std::uint32_t> pairs[] = {
      {14, 2}, {6, 15}, {3, 2}, {2, 3}, {8, 9}, {0, 12}, {2, 11}, {15, 5}};
  for (auto [s, d] : pairs) {
    FlowSpec f;
    f.src = NodeId(s);
    f.dst = NodeId(d);
    f.protocol = Protocol::kUdp;
    f.packet_size = 1500;
    f.rate = 1e6;
    c.flows.push_back(f);
  }
  if (with_hidden_pair) c.hidden_pair = std::pair{NodeId(14), NodeId(15)};
  c.duration = duration;
  return c;
}

namespace {

NodeId node_from(const nlohmann::json& j) { return NodeId(j.get<std::uint32_t>()); }

}  // namespace

ScenarioConfig scenario_from_json(const nlohmann::json& j, const ScenarioConfig& base) {
  try {
    ScenarioConfig c = base;
    if (j.contains("nodes")) {
      c.nodes = j.at("nodes").get<std::uint32_t>();
      c.gateways.clear();
      c.flows.clear();
      c.hidden_pair.reset();
      c.redirect.clear();
    }
    if (j.contains("gateways")) {
      c.gateways.clear();
      for (const auto& g : j.at("gateways")) {
        std::vector<NodeId> members;
        for (const auto& n : g) members.push_back(node_from(n));
        c.gateways.push_back(std::move(members));
      }
    }
    if (j.contains("flows")) {
      c.flows.clear();
      for (const auto& jf : j.at("flows")) {
        FlowSpec f;
        f.src = node_from(jf.at("src"));
        f.dst = node_from(jf.at("dst"));
        f.protocol = protocol_from_string(jf.value("protocol", std::string("udp")));
        f.packet_size = jf.value("packet_size", std::int64_t{1500});
        f.rate = jf.value("rate", 1e6);
        f.start_time = jf.value("start", 0.0);
        if (jf.contains("stop")) f.stop_time = jf.at("stop").get<double>();
        c.flows.push_back(f);
      }
    }
    if (j.contains("hidden_pair") && j.at("hidden_pair").is_null()) c.hidden_pair.reset();
    if (j.contains("hidden_pair") && !j.at("hidden_pair").is_null()) {
      const auto& hp = j.at("hidden_pair");
      if (!hp.is_array() || hp.size() != 2) throw ConfigError("hidden_pair must be [a, b]");
      c.hidden_pair = std::pair{node_from(hp[0]), node_from(hp[1])};
    }
    if (j.contains("redirect")) {
      c.redirect.clear();
      for (const auto& [k, v] : j.at("redirect").items()) {
        c.redirect.emplace(NodeId(static_cast<std::uint32_t>(std::stoul(k))), node_from(v));
      }
    }
    c.seed = j.value("seed", c.seed);
    c.duration = j.value("duration", c.duration);
    c.jitter = j.value("jitter", c.jitter);
    c.control_packets = j.value("control_packets", c.control_packets);
    if (j.contains("link")) {
      c.link.bandwidth = j.at("link").value("bandwidth", c.link.bandwidth);
      c.link.delay = j.at("link").value("delay", c.link.delay);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid scenario: {}", e.what()));
  } catch (const std::logic_error& e) {
    throw ConfigError(fmt::format("invalid scenario: {}", e.what()));
  }
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["nodes"] = c.nodes;
  auto& gws = j["gateways"] = nlohmann::json::array();
  for (const auto& g : c.gateways) {
    auto members = nlohmann::json::array();
    for (NodeId n : g) members.push_back(n.value);
    gws.push_back(members);
  }
  auto& flows = j["flows"] = nlohmann::json::array();
  for (const FlowSpec& f : c.flows) {
    nlohmann::json jf{{"src", f.src.value},
                      {"dst", f.dst.value},
                      {"protocol", to_string(f.protocol)},
                      {"packet_size", f.packet_size},
                      {"rate", f.rate},
                      {"start", f.start_time}};
    if (f.stop_time) jf["stop"] = *f.stop_time;
    flows.push_back(jf);
  }
  if (c.hidden_pair) {
    j["hidden_pair"] = {c.hidden_pair->first.value, c.hidden_pair->second.value};
  }
  if (!c.redirect.empty()) {
    auto& r = j["redirect"] = nlohmann::json::object();
    for (auto [from, to] : c.redirect) r[std::to_string(from.value)] = to.value;
  }
  j["seed"] = c.seed;
  j["duration"] = c.duration;
  j["jitter"] = c.jitter;
  j["control_packets"] = c.control_packets;
  j["link"] = {{"bandwidth", c.link.bandwidth}, {"delay", c.link.delay}};
  return j;
}

}  // namespace adlog
