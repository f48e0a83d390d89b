#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace parksearch {

/// Dense index into one of the graph's or simulation's tables. The tag keeps
/// node, edge, resource and agent indices from being mixed up.
template <class Tag>
struct Index {
  std::uint32_t value = 0;

  constexpr Index() = default;
  constexpr explicit Index(std::uint32_t v) : value(v) {}
  constexpr explicit Index(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit Index(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t get() const { return value; }
  friend constexpr auto operator<=>(Index, Index) = default;
};

using NodeIndex = Index<struct NodeTag>;
using EdgeIndex = Index<struct EdgeTag>;
using ResourceIndex = Index<struct ResourceTag>;
using AgentId = Index<struct AgentTag>;

}  // namespace parksearch

template <class Tag>
struct std::hash<parksearch::Index<Tag>> {
  std::size_t operator()(parksearch::Index<Tag> i) const noexcept {
    return std::hash<std::uint32_t>{}(i.value);
  }
};
