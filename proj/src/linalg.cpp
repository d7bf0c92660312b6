#include "bwcs/linalg.hpp"

#include <algorithm>

#include "bwcs/graph_algo.hpp"

namespace bwcs {

std::vector<Rat> solve_linear_system(std::vector<std::vector<Rat>> a,
                                     std::vector<Rat> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n)
      throw ModelError(ModelError::Kind::Internal, "singular linear system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rat f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rat> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

std::vector<Rat> expected_to_absorption(
    const std::vector<std::vector<ChainEdge>>& trans,
    const std::vector<bool>& absorbing, const std::vector<Rat>& boundary,
    const std::vector<Rat>& step) {
  const size_t n = trans.size();
  std::vector<Rat> value(n);
  for (size_t u = 0; u < n; ++u)
    if (absorbing[u]) value[u] = boundary[u];

  // Components of the non-absorbing subgraph, in Tarjan order: every edge
  // leaves a component into one with a smaller or equal index.
  auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
    if (absorbing[u]) return;
    for (const ChainEdge& e : trans[u])
      if (!absorbing[e.to]) cb(e.to);
  };
  SccResult scc = strongly_connected_components(n, succ);

  for (const std::vector<uint32_t>& comp : scc.members) {
    if (comp.size() == 1 && absorbing[comp[0]]) continue;
    std::vector<uint32_t> nodes;
    for (uint32_t u : comp)
      if (!absorbing[u]) nodes.push_back(u);
    if (nodes.empty()) continue;

    std::vector<uint32_t> local(n, kNoNode);
    for (size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<uint32_t>(i);

    const size_t k = nodes.size();
    std::vector<std::vector<Rat>> a(k, std::vector<Rat>(k));
    std::vector<Rat> b(k);
    bool has_exit = false;
    for (size_t i = 0; i < k; ++i) {
      uint32_t u = nodes[i];
      a[i][i] = 1;
      b[i] = step[u];
      for (const ChainEdge& e : trans[u]) {
        if (local[e.to] != kNoNode) {
          a[i][local[e.to]] -= e.prob;
        } else {
          b[i] += e.prob * value[e.to];
          has_exit = true;
        }
      }
    }
    if (!has_exit)
      throw ModelError(ModelError::Kind::Internal,
                       "recurrent class without absorption");
    std::vector<Rat> x = solve_linear_system(std::move(a), std::move(b));
    for (size_t i = 0; i < k; ++i) value[nodes[i]] = x[i];
  }
  return value;
}

}  // namespace bwcs
