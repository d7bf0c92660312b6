#include "bwcs/worst_case.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>

#include "bwcs/graph_algo.hpp"

namespace bwcs {

std::vector<bool> attractor(const GameGraph& g, const std::vector<bool>& x,
                            Owner player) {
  const size_t n = g.num_states();
  std::vector<bool> in(n, false);
  std::vector<uint32_t> pending(n, 0);  // opponent states: edges not yet inside
  std::vector<std::vector<EdgeId>> preds(n);
  for (EdgeId e = 0; e < g.edges.size(); ++e) preds[g.edges[e].dst].push_back(e);

  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    pending[s] = static_cast<uint32_t>(g.out[s].size());
    if (s < x.size() && x[s]) {
      in[s] = true;
      queue.push_back(s);
    }
  }

  while (!queue.empty()) {
    StateId t = queue.front();
    queue.pop_front();
    for (EdgeId e : preds[t]) {
      StateId u = g.edges[e].src;
      if (in[u]) continue;
      if (g.states[u].owner == player) {
        in[u] = true;
        queue.push_back(u);
      } else if (--pending[u] == 0 && !g.out[u].empty()) {
        in[u] = true;
        queue.push_back(u);
      }
    }
  }
  return in;
}

// ---------------------------------------------------------------------------
// Karp minimum cycle mean, one run per SCC.

namespace {

struct KarpScc {
  Rat mean;
  std::vector<uint32_t> cycle;
};

// Minimum mean cycle inside one SCC (given as node list); nullopt if the
// component has no edge at all.
std::optional<KarpScc> karp_in_scc(const Digraph& g,
                                   const std::vector<uint32_t>& nodes) {
  const size_t k = nodes.size();
  std::vector<uint32_t> local(g.size(), kNoNode);
  for (size_t i = 0; i < k; ++i) local[nodes[i]] = static_cast<uint32_t>(i);

  bool has_edge = false;
  for (uint32_t u : nodes)
    for (const DigraphEdge& e : g[u])
      if (local[e.to] != kNoNode) has_edge = true;
  if (!has_edge) return std::nullopt;

  constexpr int64_t kInf = std::numeric_limits<int64_t>::max();
  // d[t][v] = min weight of a t-edge walk from nodes[0] to v, within the SCC.
  std::vector<std::vector<int64_t>> d(k + 1, std::vector<int64_t>(k, kInf));
  std::vector<std::vector<uint32_t>> parent(k + 1,
                                            std::vector<uint32_t>(k, kNoNode));
  d[0][0] = 0;
  for (size_t t = 1; t <= k; ++t) {
    for (size_t i = 0; i < k; ++i) {
      if (d[t - 1][i] == kInf) continue;
      uint32_t u = nodes[i];
      for (const DigraphEdge& e : g[u]) {
        uint32_t j = local[e.to];
        if (j == kNoNode) continue;
        int64_t cand = d[t - 1][i] + e.weight;
        if (cand < d[t][j]) {
          d[t][j] = cand;
          parent[t][j] = static_cast<uint32_t>(i);
        }
      }
    }
  }

  // mean* = min_v max_t (d[k][v] - d[t][v]) / (k - t)
  bool found = false;
  Rat best;
  uint32_t best_v = 0;
  for (size_t v = 0; v < k; ++v) {
    if (d[k][v] == kInf) continue;
    bool any = false;
    Rat worst;
    for (size_t t = 0; t < k; ++t) {
      if (d[t][v] == kInf) continue;
      Rat cand(static_cast<long>(d[k][v] - d[t][v]),
               static_cast<long>(k - t));
      cand.canonicalize();
      if (!any || cand > worst) {
        worst = cand;
        any = true;
      }
    }
    if (!any) continue;
    if (!found || worst < best) {
      best = worst;
      best_v = static_cast<uint32_t>(v);
      found = true;
    }
  }
  if (!found)
    throw ModelError(ModelError::Kind::Internal, "karp: SCC without walk");

  // Walk k parents back from best_v; any repeated node closes a cycle of
  // minimum mean on this critical walk.
  std::vector<uint32_t> walk(k + 1);
  walk[k] = best_v;
  for (size_t t = k; t > 0; --t) walk[t - 1] = parent[t][walk[t]];
  std::vector<uint32_t> seen_at(k, kNoNode);
  size_t cy_begin = 0, cy_end = 0;
  for (size_t t = 0; t <= k; ++t) {
    if (seen_at[walk[t]] != kNoNode) {
      cy_begin = seen_at[walk[t]];
      cy_end = t;
      break;
    }
    seen_at[walk[t]] = static_cast<uint32_t>(t);
  }
  KarpScc res;
  res.mean = best;
  for (size_t t = cy_begin; t < cy_end; ++t) res.cycle.push_back(nodes[walk[t]]);

  // Exactness cross-check of the extracted witness.
  int64_t sum = 0;
  for (size_t i = 0; i < res.cycle.size(); ++i) {
    uint32_t u = res.cycle[i];
    uint32_t v = res.cycle[(i + 1) % res.cycle.size()];
    int64_t w = kInf;
    for (const DigraphEdge& e : g[u])
      if (e.to == v) w = std::min(w, e.weight);
    if (w == kInf)
      throw ModelError(ModelError::Kind::Internal, "karp: broken witness");
    sum += w;
  }
  Rat check(static_cast<long>(sum), static_cast<long>(res.cycle.size()));
  check.canonicalize();
  if (check != best)
    throw ModelError(ModelError::Kind::Internal, "karp: witness mean mismatch");
  return res;
}

}  // namespace

std::optional<CycleMean> min_cycle_mean(const Digraph& g, uint32_t from) {
  const size_t n = g.size();
  if (from >= n) return std::nullopt;
  std::vector<bool> reach(n, false);
  std::vector<uint32_t> bfs_parent(n, kNoNode);
  std::queue<uint32_t> q;
  reach[from] = true;
  q.push(from);
  while (!q.empty()) {
    uint32_t u = q.front();
    q.pop();
    for (const DigraphEdge& e : g[u]) {
      if (!reach[e.to]) {
        reach[e.to] = true;
        bfs_parent[e.to] = u;
        q.push(e.to);
      }
    }
  }

  auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
    if (!reach[u]) return;
    for (const DigraphEdge& e : g[u])
      if (reach[e.to]) cb(e.to);
  };
  SccResult scc = strongly_connected_components(n, succ);

  std::optional<CycleMean> best;
  for (const std::vector<uint32_t>& comp : scc.members) {
    if (!reach[comp[0]]) continue;
    std::vector<uint32_t> nodes = comp;
    std::sort(nodes.begin(), nodes.end());
    if (nodes.size() == 1) {
      bool self = false;
      for (const DigraphEdge& e : g[nodes[0]]) self |= (e.to == nodes[0]);
      if (!self) continue;
    }
    std::optional<KarpScc> r = karp_in_scc(g, nodes);
    if (!r) continue;
    if (!best || r->mean < best->mean) {
      best = CycleMean{r->mean, r->cycle, {}};
    }
  }
  if (!best) return std::nullopt;

  // Path from the query node to the cycle entry.
  std::vector<uint32_t> path;
  for (uint32_t v = best->cycle.front(); v != kNoNode && v != from;
       v = bfs_parent[v])
    path.push_back(v);
  if (best->cycle.front() != from) path.push_back(from);
  std::reverse(path.begin(), path.end());
  if (!path.empty()) path.pop_back();  // drop the cycle entry itself
  best->path = std::move(path);
  return best;
}

// ---------------------------------------------------------------------------
// Shortest-path worst case.

GameValueTable solve_sp_worst_case(const GameGraph& g) {
  const size_t n = g.num_states();
  constexpr int64_t kInf = std::numeric_limits<int64_t>::max();
  std::vector<int64_t> w(n, kInf);
  for (StateId s = 0; s < n; ++s)
    if (g.target(s)) w[s] = 0;

  auto step = [&](std::vector<int64_t>& next) {
    bool changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (g.target(s)) continue;
      bool p1 = g.states[s].owner == Owner::P1;
      int64_t acc = p1 ? kInf : 0;
      for (EdgeId e : g.out[s]) {
        int64_t tv = w[g.edges[e].dst];
        int64_t cand = tv == kInf ? kInf : g.edges[e].weight + tv;
        acc = p1 ? std::min(acc, cand) : std::max(acc, cand);
      }
      if (acc != next[s]) {
        next[s] = acc;
        changed = true;
      }
    }
    return changed;
  };

  std::vector<int64_t> next = w;
  for (size_t round = 0; round <= n + 1; ++round) {
    bool changed = step(next);
    w = next;
    if (!changed) break;
    if (round == n + 1)
      throw ModelError(ModelError::Kind::Internal,
                       "sp worst case failed to stabilize");
  }

  GameValueTable table;
  table.value.resize(n);
  table.finite.resize(n);
  table.p1_choice.assign(n, kNoEdge);
  table.p2_choice.assign(n, kNoEdge);
  for (StateId s = 0; s < n; ++s) {
    table.finite[s] = w[s] != kInf;
    if (table.finite[s]) table.value[s] = rat_of_int64(w[s]);
    if (g.target(s)) continue;
    bool p1 = g.states[s].owner == Owner::P1;
    EdgeId pick = kNoEdge;
    for (EdgeId e : g.out[s]) {
      int64_t tv = w[g.edges[e].dst];
      int64_t cand = tv == kInf ? kInf : g.edges[e].weight + tv;
      if (pick == kNoEdge) {
        pick = e;
        continue;
      }
      int64_t cur = [&] {
        int64_t pv = w[g.edges[pick].dst];
        return pv == kInf ? kInf : g.edges[pick].weight + pv;
      }();
      if (p1 ? cand < cur : cand > cur) pick = e;
    }
    (p1 ? table.p1_choice : table.p2_choice)[s] = pick;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Mean-payoff game: Zwick-Paterson value iteration plus per-class energy
// progress measures for strategy extraction.

namespace {

// Least fixpoint of the energy lifting on a class subgame with shifted
// weights. `maximizer` is the player who wants all cycles nonnegative; its
// states take the min over edges. Returns per-node chosen edge for the
// maximizer. All measures must stay finite, the class invariant guarantees it.
void energy_strategy(const GameGraph& g, const std::vector<StateId>& nodes,
                     const std::vector<std::vector<std::pair<EdgeId, int64_t>>>& adj,
                     Owner maximizer, std::vector<EdgeId>& choice) {
  const size_t k = nodes.size();
  int64_t wmax = 1;
  for (size_t i = 0; i < k; ++i)
    for (auto& [e, w] : adj[i]) wmax = std::max(wmax, w < 0 ? -w : w);
  const int64_t top = static_cast<int64_t>(k) * wmax + 1;

  std::vector<int64_t> f(k, 0);
  std::vector<uint32_t> local(g.num_states(), kNoNode);
  for (size_t i = 0; i < k; ++i) local[nodes[i]] = static_cast<uint32_t>(i);

  bool changed = true;
  size_t rounds = 0;
  while (changed) {
    changed = false;
    if (++rounds > k * k * static_cast<size_t>(2 * top + 2) + 4)
      throw ModelError(ModelError::Kind::Internal, "energy lifting diverges");
    for (size_t i = 0; i < k; ++i) {
      bool maxer = g.states[nodes[i]].owner == maximizer;
      int64_t acc = maxer ? std::numeric_limits<int64_t>::max()
                          : std::numeric_limits<int64_t>::min();
      for (auto& [e, w] : adj[i]) {
        uint32_t j = local[g.edges[e].dst];
        int64_t v = std::max<int64_t>(0, f[j] - w);
        acc = maxer ? std::min(acc, v) : std::max(acc, v);
      }
      acc = std::min(acc, top);
      if (acc > f[i]) {
        f[i] = acc;
        changed = true;
      }
    }
  }
  for (size_t i = 0; i < k; ++i) {
    if (f[i] >= top)
      throw ModelError(ModelError::Kind::Internal,
                       "energy measure hit top inside a value class");
    if (g.states[nodes[i]].owner != maximizer) continue;
    EdgeId pick = kNoEdge;
    int64_t best = 0;
    for (auto& [e, w] : adj[i]) {
      uint32_t j = local[g.edges[e].dst];
      int64_t v = std::max<int64_t>(0, f[j] - w);
      if (pick == kNoEdge || v < best) {
        pick = e;
        best = v;
      }
    }
    choice[nodes[i]] = pick;
  }
}

}  // namespace

GameValueTable solve_mp_game(const GameGraph& g) {
  const size_t n = g.num_states();
  const int64_t wmax = g.max_abs_weight();

  // Step bound 4 n^3 W + 1 separates the k-step averages enough to identify
  // the exact value as the unique nearby rational with denominator <= n.
  int64_t steps = 1;
  if (wmax > 0) {
    Int bound = Int(4) * Int(static_cast<long>(n)) * Int(static_cast<long>(n)) *
                Int(static_cast<long>(n)) * Int(static_cast<long>(wmax)) + 1;
    if (!bound.fits_slong_p() || bound.get_si() > (int64_t{1} << 40))
      throw ModelError(ModelError::Kind::Overflow,
                       "mean-payoff value iteration bound too large");
    steps = bound.get_si();
  }

  std::vector<int64_t> v(n, 0), next(n, 0);
  for (int64_t t = 0; t < steps; ++t) {
    for (StateId s = 0; s < n; ++s) {
      bool p1 = g.states[s].owner == Owner::P1;
      int64_t acc = p1 ? std::numeric_limits<int64_t>::min()
                       : std::numeric_limits<int64_t>::max();
      for (EdgeId e : g.out[s]) {
        int64_t cand = g.edges[e].weight + v[g.edges[e].dst];
        acc = p1 ? std::max(acc, cand) : std::min(acc, cand);
      }
      next[s] = acc;
    }
    std::swap(v, next);
  }

  GameValueTable table;
  table.value.resize(n);
  table.finite.assign(n, true);
  table.p1_choice.assign(n, kNoEdge);
  table.p2_choice.assign(n, kNoEdge);

  const Int ksteps(static_cast<long>(steps));
  for (StateId s = 0; s < n; ++s) {
    // nearest p/q to v[s]/steps over q = 1..n; the true value is the unique
    // candidate within the iteration error band
    Rat target(Int(static_cast<long>(v[s])), ksteps);
    target.canonicalize();
    bool have = false;
    Rat best, best_err;
    for (size_t q = 1; q <= n; ++q) {
      Int p = round_nearest(Int(static_cast<long>(v[s])) * Int(static_cast<long>(q)),
                            ksteps);
      Rat cand(p, Int(static_cast<long>(q)));
      cand.canonicalize();
      Rat err = abs(cand - target);
      if (!have || err < best_err) {
        have = true;
        best = cand;
        best_err = err;
      }
    }
    table.value[s] = best;
  }

  // Group states by value; within a class, run the energy extraction on the
  // class subgame with weights q*w - p for both players.
  std::vector<bool> done(n, false);
  for (StateId s0 = 0; s0 < n; ++s0) {
    if (done[s0]) continue;
    std::vector<StateId> nodes;
    for (StateId s = s0; s < n; ++s)
      if (!done[s] && table.value[s] == table.value[s0]) {
        nodes.push_back(s);
        done[s] = true;
      }
    const Int p = table.value[s0].get_num();
    const Int q = table.value[s0].get_den();
    const int64_t pi = p.get_si();
    const int64_t qi = q.get_si();

    std::vector<uint32_t> local(n, kNoNode);
    for (size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<uint32_t>(i);

    std::vector<std::vector<std::pair<EdgeId, int64_t>>> shifted(nodes.size()),
        negated(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      for (EdgeId e : g.out[nodes[i]]) {
        if (local[g.edges[e].dst] == kNoNode) continue;
        int64_t w = qi * g.edges[e].weight - pi;
        shifted[i].push_back({e, w});
        negated[i].push_back({e, -w});
      }
      if (shifted[i].empty())
        throw ModelError(ModelError::Kind::Internal,
                         "value class is not edge-closed");
    }
    energy_strategy(g, nodes, shifted, Owner::P1, table.p1_choice);
    energy_strategy(g, nodes, negated, Owner::P2, table.p2_choice);
  }
  return table;
}

}  // namespace bwcs
