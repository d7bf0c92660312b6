#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace bwcs {

/// Strongly connected components of a graph given by a successor callback.
/// Components are returned in reverse topological order (component 0 has no
/// edges into later components... specifically: every edge goes from a
/// higher-or-equal component index to a lower-or-equal one is NOT guaranteed;
/// what is guaranteed is Tarjan order: all edges leave a component into
/// components with smaller index or itself).
struct SccResult {
  std::vector<uint32_t> component;          // node -> component id
  std::vector<std::vector<uint32_t>> members;  // component id -> nodes
};

SccResult strongly_connected_components(
    size_t n, const std::function<void(uint32_t, const std::function<void(uint32_t)>&)>& for_each_succ);

}  // namespace bwcs
