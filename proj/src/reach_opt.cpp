#include "bwcs/reach_opt.hpp"

#include <algorithm>
#include <queue>

#include "bwcs/graph_algo.hpp"
#include "bwcs/linalg.hpp"

namespace bwcs {

namespace {

using Kind = ReachOptProblem::Kind;

// End components among the allowed non-terminal nodes: strongly connected
// via internal moves, stochastic support closed. Worklist of shrinking
// candidates, deterministic output order.
std::vector<std::vector<uint32_t>> end_components(
    const ReachOptProblem& p, const std::vector<bool>& allowed) {
  const size_t n = p.nodes.size();
  std::vector<std::vector<uint32_t>> result;
  std::vector<std::vector<uint32_t>> work;
  {
    std::vector<uint32_t> all;
    for (uint32_t u = 0; u < n; ++u)
      if (allowed[u] && p.nodes[u].kind != Kind::Terminal) all.push_back(u);
    if (!all.empty()) work.push_back(std::move(all));
  }

  while (!work.empty()) {
    std::vector<uint32_t> cand = std::move(work.back());
    work.pop_back();

    std::vector<bool> in(n, false);
    for (uint32_t u : cand) in[u] = true;

    // Remove stochastic nodes whose support leaks out, to closure.
    bool shrunk = true;
    while (shrunk) {
      shrunk = false;
      for (uint32_t u : cand) {
        if (!in[u] || p.nodes[u].kind != Kind::Stochastic) continue;
        for (auto& [t, pr] : p.nodes[u].dist) {
          if (pr > 0 && !in[t]) {
            in[u] = false;
            shrunk = true;
            break;
          }
        }
      }
    }
    std::vector<uint32_t> kept;
    for (uint32_t u : cand)
      if (in[u]) kept.push_back(u);
    if (kept.empty()) continue;

    auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
      if (!in[u]) return;
      if (p.nodes[u].kind == Kind::Decision) {
        for (uint32_t t : p.nodes[u].succs)
          if (in[t]) cb(t);
      } else if (p.nodes[u].kind == Kind::Stochastic) {
        for (auto& [t, pr] : p.nodes[u].dist)
          if (pr > 0) cb(t);
      }
    };
    SccResult scc = strongly_connected_components(n, succ);

    bool whole = true;
    for (uint32_t u : kept)
      if (scc.component[u] != scc.component[kept[0]]) whole = false;

    if (whole && kept.size() < cand.size()) {
      work.push_back(std::move(kept));
      continue;
    }
    if (whole) {
      bool ok = true;
      if (kept.size() == 1) {
        uint32_t u = kept[0];
        bool self = false;
        if (p.nodes[u].kind == Kind::Decision) {
          for (uint32_t t : p.nodes[u].succs) self |= (t == u);
        } else {
          for (auto& [t, pr] : p.nodes[u].dist) self |= (pr > 0 && t == u);
        }
        ok = self;
      }
      if (ok) {
        std::sort(kept.begin(), kept.end());
        result.push_back(std::move(kept));
      }
      continue;
    }

    std::vector<std::vector<uint32_t>> parts(scc.members.size());
    for (uint32_t u : kept) parts[scc.component[u]].push_back(u);
    for (auto& part : parts)
      if (!part.empty()) work.push_back(std::move(part));
  }

  std::sort(result.begin(), result.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return result;
}

}  // namespace

std::vector<bool> almost_sure_reach_region(const ReachOptProblem& p) {
  const size_t n = p.nodes.size();
  std::vector<bool> y(n, true);
  while (true) {
    std::vector<bool> z(n, false);
    for (uint32_t u = 0; u < n; ++u)
      if (y[u] && p.nodes[u].kind == Kind::Terminal) z[u] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (uint32_t u = 0; u < n; ++u) {
        if (z[u] || !y[u]) continue;
        const auto& node = p.nodes[u];
        if (node.kind == Kind::Decision) {
          for (uint32_t t : node.succs)
            if (z[t]) {
              z[u] = true;
              grew = true;
              break;
            }
        } else if (node.kind == Kind::Stochastic) {
          bool stays = true, hits = false;
          for (auto& [t, pr] : node.dist) {
            if (pr <= 0) continue;
            stays &= y[t];
            hits |= z[t];
          }
          if (stays && hits) {
            z[u] = true;
            grew = true;
          }
        }
      }
    }
    if (z == y) return y;
    y = std::move(z);
  }
}

ReachOptResult maximize_terminal_reward(const ReachOptProblem& p) {
  const size_t n = p.nodes.size();
  ReachOptResult res;
  res.region = almost_sure_reach_region(p);
  res.value.assign(n, Rat());
  res.choice.assign(n, kNoNode);
  res.mec_id.assign(n, kNoNode);

  std::vector<std::vector<uint32_t>> mecs = end_components(p, res.region);
  for (uint32_t i = 0; i < mecs.size(); ++i)
    for (uint32_t u : mecs[i]) res.mec_id[u] = i;
  res.mec_exit.assign(mecs.size(), {kNoNode, kNoNode});

  // Quotient nodes: one per region node outside any component, one decision
  // node per component, terminals kept.
  std::vector<uint32_t> qof(n, kNoNode);
  struct QNode {
    Kind kind;
    std::vector<std::pair<uint32_t, uint32_t>> acts;  // (target q, tag)
    std::vector<std::pair<uint32_t, Rat>> dist;
    Rat reward;
  };
  std::vector<QNode> q;
  std::vector<uint32_t> mec_q(mecs.size(), kNoNode);

  for (uint32_t u = 0; u < n; ++u) {
    if (!res.region[u] || res.mec_id[u] != kNoNode) continue;
    qof[u] = static_cast<uint32_t>(q.size());
    q.push_back(QNode{p.nodes[u].kind, {}, {}, p.nodes[u].reward});
  }
  for (uint32_t i = 0; i < mecs.size(); ++i) {
    mec_q[i] = static_cast<uint32_t>(q.size());
    q.push_back(QNode{Kind::Decision, {}, {}, Rat()});
    for (uint32_t u : mecs[i]) qof[u] = mec_q[i];
  }

  // Exit bookkeeping: tag = index into exits[mec] for component nodes, or
  // the original succ index for plain decision nodes.
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> exits(mecs.size());

  for (uint32_t u = 0; u < n; ++u) {
    if (!res.region[u] || qof[u] == kNoNode) continue;
    const auto& node = p.nodes[u];
    uint32_t me = res.mec_id[u];
    if (node.kind == Kind::Decision) {
      for (uint32_t j = 0; j < node.succs.size(); ++j) {
        uint32_t t = node.succs[j];
        if (!res.region[t]) continue;
        if (me != kNoNode && res.mec_id[t] == me) continue;  // internal move
        if (me != kNoNode) {
          exits[me].push_back({u, j});
          q[mec_q[me]].acts.push_back(
              {qof[t], static_cast<uint32_t>(exits[me].size() - 1)});
        } else {
          q[qof[u]].acts.push_back({qof[t], j});
        }
      }
    } else if (node.kind == Kind::Stochastic && me == kNoNode) {
      for (auto& [t, pr] : node.dist)
        if (pr > 0) q[qof[u]].dist.push_back({qof[t], pr});
    }
  }

  // Policy iteration over the quotient; every policy is absorbing because
  // the quotient has no end component outside the terminals.
  std::vector<uint32_t> pol(q.size(), 0);
  std::vector<Rat> qval;
  for (size_t round = 0;; ++round) {
    if (round > 100000)
      throw ModelError(ModelError::Kind::Internal,
                       "terminal-reward policy iteration diverges");
    std::vector<std::vector<ChainEdge>> trans(q.size());
    std::vector<bool> absorbing(q.size(), false);
    std::vector<Rat> boundary(q.size()), step(q.size());
    for (uint32_t u = 0; u < q.size(); ++u) {
      if (q[u].kind == Kind::Terminal) {
        absorbing[u] = true;
        boundary[u] = q[u].reward;
      } else if (q[u].kind == Kind::Decision) {
        if (q[u].acts.empty())
          throw ModelError(ModelError::Kind::Internal,
                           "quotient decision node without actions");
        trans[u].push_back(ChainEdge{q[u].acts[pol[u]].first, Rat(1), 0});
      } else {
        for (auto& [t, pr] : q[u].dist)
          trans[u].push_back(ChainEdge{t, pr, 0});
      }
    }
    qval = expected_to_absorption(trans, absorbing, boundary, step);

    // Switch only on strict improvement, lowest index among the improvers.
    bool changed = false;
    for (uint32_t u = 0; u < q.size(); ++u) {
      if (q[u].kind != Kind::Decision) continue;
      uint32_t pick = pol[u];
      Rat cur = qval[q[u].acts[pol[u]].first];
      for (uint32_t a = 0; a < q[u].acts.size(); ++a) {
        if (qval[q[u].acts[a].first] > cur) {
          cur = qval[q[u].acts[a].first];
          pick = a;
        }
      }
      if (pick != pol[u]) {
        pol[u] = pick;
        changed = true;
      }
    }
    if (!changed) break;
  }

  for (uint32_t u = 0; u < n; ++u)
    if (res.region[u] && qof[u] != kNoNode) res.value[u] = qval[qof[u]];

  // Map choices back. Component nodes route toward the chosen exit member.
  for (uint32_t u = 0; u < n; ++u) {
    if (!res.region[u] || p.nodes[u].kind != Kind::Decision) continue;
    if (res.mec_id[u] == kNoNode) res.choice[u] = q[qof[u]].acts[pol[qof[u]]].second;
  }
  for (uint32_t i = 0; i < mecs.size(); ++i) {
    auto [x, j] = exits[i][q[mec_q[i]].acts[pol[mec_q[i]]].second];
    res.mec_exit[i] = {x, j};

    // BFS distances toward x through internal moves.
    std::vector<bool> in(n, false);
    for (uint32_t u : mecs[i]) in[u] = true;
    std::vector<uint32_t> dist(n, kNoNode);
    std::queue<uint32_t> bfs;
    dist[x] = 0;
    bfs.push(x);
    // reverse adjacency inside the component
    std::vector<std::vector<uint32_t>> rev(n);
    for (uint32_t u : mecs[i]) {
      const auto& node = p.nodes[u];
      if (node.kind == Kind::Decision) {
        for (uint32_t t : node.succs)
          if (in[t]) rev[t].push_back(u);
      } else {
        for (auto& [t, pr] : node.dist)
          if (pr > 0) rev[t].push_back(u);
      }
    }
    while (!bfs.empty()) {
      uint32_t v = bfs.front();
      bfs.pop();
      for (uint32_t w : rev[v]) {
        if (dist[w] == kNoNode) {
          dist[w] = dist[v] + 1;
          bfs.push(w);
        }
      }
    }
    for (uint32_t u : mecs[i]) {
      if (p.nodes[u].kind != Kind::Decision) continue;
      if (u == x) {
        res.choice[u] = j;
        continue;
      }
      if (dist[u] == kNoNode)
        throw ModelError(ModelError::Kind::Internal,
                         "end component routing target unreachable");
      for (uint32_t a = 0; a < p.nodes[u].succs.size(); ++a) {
        uint32_t t = p.nodes[u].succs[a];
        if (in[t] && dist[t] == dist[u] - 1) {
          res.choice[u] = a;
          break;
        }
      }
    }
  }
  return res;
}

}  // namespace bwcs
