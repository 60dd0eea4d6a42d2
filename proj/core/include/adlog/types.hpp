#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace adlog {

// Index of a simulated node (IP addresses are replaced by node numbers).
struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) {
  return os << id.value;
}

// Dense vocabulary index.
using TokenId = std::uint32_t;

}  // namespace adlog

template <>
struct std::hash<adlog::NodeId> {
  std::size_t operator()(adlog::NodeId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
