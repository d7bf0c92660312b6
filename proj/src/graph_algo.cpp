#include "bwcs/graph_algo.hpp"

#include <algorithm>

namespace bwcs {

// Iterative Tarjan. Successor callback style keeps callers from having to
// materialize adjacency lists for derived graphs.
SccResult strongly_connected_components(
    size_t n,
    const std::function<void(uint32_t, const std::function<void(uint32_t)>&)>& for_each_succ) {
  constexpr uint32_t kUnset = UINT32_MAX;
  SccResult res;
  res.component.assign(n, kUnset);

  std::vector<uint32_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<uint32_t> stack;
  uint32_t next_index = 0;

  struct Frame {
    uint32_t v;
    std::vector<uint32_t> succs;
    size_t next = 0;
  };

  for (uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<Frame> call;
    call.push_back(Frame{root, {}, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    for_each_succ(root, [&](uint32_t t) { call.back().succs.push_back(t); });

    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < f.succs.size()) {
        uint32_t w = f.succs[f.next++];
        if (index[w] == kUnset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back(Frame{w, {}, 0});
          for_each_succ(w, [&](uint32_t t) { call.back().succs.push_back(t); });
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        uint32_t v = f.v;
        if (low[v] == index[v]) {
          uint32_t comp = static_cast<uint32_t>(res.members.size());
          res.members.emplace_back();
          while (true) {
            uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            res.component[w] = comp;
            res.members[comp].push_back(w);
            if (w == v) break;
          }
        }
        call.pop_back();
        if (!call.empty()) {
          uint32_t parent = call.back().v;
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }
  return res;
}

}  // namespace bwcs
