#include "bwcs/expectation.hpp"

#include <algorithm>
#include <queue>

#include "bwcs/graph_algo.hpp"
#include "bwcs/linalg.hpp"
#include "bwcs/reach_opt.hpp"

namespace bwcs {

namespace {

std::vector<Rat> one_step_reward(const std::vector<std::vector<ChainEdge>>& trans) {
  std::vector<Rat> r(trans.size());
  for (size_t u = 0; u < trans.size(); ++u)
    for (const ChainEdge& e : trans[u]) r[u] += e.prob * rat_of_int64(e.weight);
  return r;
}

// Long-run average reward of one irreducible class via the renewal ratio at
// an anchor node: expected reward / expected time per return.
Rat recurrent_gain(const std::vector<std::vector<ChainEdge>>& trans,
                   const std::vector<uint32_t>& members) {
  const uint32_t anchor = members[0];
  std::vector<uint32_t> local(trans.size(), kNoNode);
  for (uint32_t i = 0; i < members.size(); ++i) local[members[i]] = i;

  std::vector<std::vector<ChainEdge>> sub(members.size());
  for (uint32_t i = 0; i < members.size(); ++i)
    for (const ChainEdge& e : trans[members[i]]) {
      if (local[e.to] == kNoNode)
        throw ModelError(ModelError::Kind::Internal,
                         "recurrent class is not closed");
      sub[i].push_back(ChainEdge{local[e.to], e.prob, e.weight});
    }

  std::vector<bool> absorbing(members.size(), false);
  absorbing[0] = true;  // anchor is local node 0
  std::vector<Rat> zero(members.size());
  std::vector<Rat> reward_to_anchor = expected_to_absorption(
      sub, absorbing, zero, one_step_reward(sub));
  std::vector<Rat> ones(members.size(), Rat(1));
  std::vector<Rat> time_to_anchor =
      expected_to_absorption(sub, absorbing, zero, ones);

  Rat ret_reward, ret_time(1);
  for (const ChainEdge& e : sub[0]) {
    ret_reward += e.prob * rat_of_int64(e.weight);
    if (e.to != 0) {
      ret_reward += e.prob * reward_to_anchor[e.to];
      ret_time += e.prob * time_to_anchor[e.to];
    }
  }
  return ret_reward / ret_time;
}

struct ChainClasses {
  std::vector<std::vector<uint32_t>> bottoms;  // sorted member lists
  std::vector<bool> recurrent;                 // node in some bottom class
};

ChainClasses bottom_classes(const std::vector<std::vector<ChainEdge>>& trans) {
  auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
    for (const ChainEdge& e : trans[u]) cb(e.to);
  };
  SccResult scc = strongly_connected_components(trans.size(), succ);
  ChainClasses cc;
  cc.recurrent.assign(trans.size(), false);
  for (const auto& comp : scc.members) {
    bool bottom = true;
    for (uint32_t u : comp)
      for (const ChainEdge& e : trans[u])
        if (scc.component[e.to] != scc.component[comp[0]]) bottom = false;
    if (!bottom) continue;
    std::vector<uint32_t> members = comp;
    std::sort(members.begin(), members.end());
    for (uint32_t u : members) cc.recurrent[u] = true;
    cc.bottoms.push_back(std::move(members));
  }
  std::sort(cc.bottoms.begin(), cc.bottoms.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return cc;
}

// Exact (gain, bias) solution of the evaluation equations of one chain.
struct GainBias {
  std::vector<Rat> gain, bias;
};

GainBias evaluate_gain_bias(const std::vector<std::vector<ChainEdge>>& trans) {
  const size_t n = trans.size();
  GainBias gb;
  gb.gain.assign(n, Rat());
  gb.bias.assign(n, Rat());
  std::vector<Rat> reward = one_step_reward(trans);

  ChainClasses cc = bottom_classes(trans);
  for (const auto& members : cc.bottoms) {
    Rat g = recurrent_gain(trans, members);
    for (uint32_t u : members) gb.gain[u] = g;

    // (I - P) h = r - g with h(anchor) = 0; the anchor row replaces one
    // dependent equation.
    const size_t k = members.size();
    std::vector<uint32_t> local(n, kNoNode);
    for (uint32_t i = 0; i < k; ++i) local[members[i]] = static_cast<uint32_t>(i);
    std::vector<std::vector<Rat>> a(k, std::vector<Rat>(k));
    std::vector<Rat> b(k);
    for (size_t i = 0; i < k; ++i) {
      if (i == 0) {
        a[0][0] = 1;
        b[0] = 0;
        continue;
      }
      uint32_t u = members[i];
      a[i][i] = 1;
      b[i] = reward[u] - g;
      for (const ChainEdge& e : trans[u]) a[i][local[e.to]] -= e.prob;
    }
    std::vector<Rat> h = solve_linear_system(std::move(a), std::move(b));
    for (size_t i = 0; i < k; ++i) gb.bias[members[i]] = h[i];
  }

  std::vector<Rat> boundary_gain(n), boundary_bias(n), zero(n);
  for (uint32_t u = 0; u < n; ++u) {
    boundary_gain[u] = gb.gain[u];
    boundary_bias[u] = gb.bias[u];
  }
  std::vector<Rat> tg = expected_to_absorption(trans, cc.recurrent,
                                               boundary_gain, zero);
  std::vector<Rat> step(n);
  for (uint32_t u = 0; u < n; ++u)
    if (!cc.recurrent[u]) step[u] = reward[u] - tg[u];
  std::vector<Rat> th =
      expected_to_absorption(trans, cc.recurrent, boundary_bias, step);
  for (uint32_t u = 0; u < n; ++u) {
    if (!cc.recurrent[u]) {
      gb.gain[u] = tg[u];
      gb.bias[u] = th[u];
    }
  }
  return gb;
}

}  // namespace

// ---------------------------------------------------------------------------
// Chain evaluation.

Rat mc_expected_mp(const MarkovChain& mc) {
  ChainClasses cc = bottom_classes(mc.trans);
  std::vector<Rat> boundary(mc.size()), zero(mc.size());
  for (const auto& members : cc.bottoms) {
    Rat g = recurrent_gain(mc.trans, members);
    for (uint32_t u : members) boundary[u] = g;
  }
  std::vector<Rat> v =
      expected_to_absorption(mc.trans, cc.recurrent, boundary, zero);
  return v[mc.initial];
}

std::optional<Rat> mc_expected_total_cost(const MarkovChain& mc,
                                          const std::vector<bool>& target) {
  const size_t n = mc.size();
  std::vector<bool> absorbing(n, false);
  for (uint32_t u = 0; u < n; ++u)
    absorbing[u] = target[mc.nodes[u].state];

  // Infinite iff some bottom class of the stopped chain avoids the target.
  auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
    if (absorbing[u]) return;
    for (const ChainEdge& e : mc.trans[u])
      if (!absorbing[e.to]) cb(e.to);
  };
  SccResult scc = strongly_connected_components(n, succ);
  for (const auto& comp : scc.members) {
    if (comp.size() == 1 && absorbing[comp[0]]) continue;
    bool exits = false;
    for (uint32_t u : comp) {
      if (absorbing[u]) continue;
      for (const ChainEdge& e : mc.trans[u])
        if (absorbing[e.to] || scc.component[e.to] != scc.component[comp[0]])
          exits = true;
    }
    if (!exits) return std::nullopt;
  }

  std::vector<Rat> boundary(n), step(n);
  for (uint32_t u = 0; u < n; ++u)
    if (!absorbing[u])
      for (const ChainEdge& e : mc.trans[u])
        step[u] += e.prob * rat_of_int64(e.weight);
  std::vector<Rat> v = expected_to_absorption(mc.trans, absorbing, boundary, step);
  return v[mc.initial];
}

// ---------------------------------------------------------------------------
// Maximal end components.

std::vector<EcRecord> mec_decomposition(const Mdp& mdp) {
  return mec_decomposition(mdp, std::vector<bool>(mdp.g.num_states(), true));
}

std::vector<EcRecord> mec_decomposition(const Mdp& mdp,
                                        const std::vector<bool>& allowed) {
  const GameGraph& g = mdp.g;
  const size_t n = g.num_states();
  std::vector<std::vector<StateId>> found;

  std::vector<std::vector<StateId>> work;
  {
    std::vector<StateId> all;
    for (StateId s = 0; s < n; ++s)
      if (allowed[s]) all.push_back(s);
    if (!all.empty()) work.push_back(std::move(all));
  }

  while (!work.empty()) {
    std::vector<StateId> cand = std::move(work.back());
    work.pop_back();
    std::vector<bool> in(n, false);
    for (StateId s : cand) in[s] = true;

    bool shrunk = true;
    while (shrunk) {
      shrunk = false;
      for (StateId s : cand) {
        if (!in[s] || !mdp.stochastic(s)) continue;
        for (const auto& [e, p] : mdp.row[s].entries) {
          if (p > 0 && !in[g.edges[e].dst]) {
            in[s] = false;
            shrunk = true;
            break;
          }
        }
      }
    }
    std::vector<StateId> kept;
    for (StateId s : cand)
      if (in[s]) kept.push_back(s);
    if (kept.empty()) continue;

    auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
      if (!in[u]) return;
      if (mdp.stochastic(u)) {
        for (const auto& [e, p] : mdp.row[u].entries)
          if (p > 0) cb(g.edges[e].dst);
      } else {
        for (EdgeId e : g.out[u])
          if (in[g.edges[e].dst]) cb(g.edges[e].dst);
      }
    };
    SccResult scc = strongly_connected_components(n, succ);

    bool whole = true;
    for (StateId s : kept)
      if (scc.component[s] != scc.component[kept[0]]) whole = false;

    if (whole && kept.size() < cand.size()) {
      work.push_back(std::move(kept));
      continue;
    }
    if (whole) {
      bool ok = true;
      if (kept.size() == 1) {
        StateId s = kept[0];
        bool self = false;
        if (mdp.stochastic(s)) {
          for (const auto& [e, p] : mdp.row[s].entries)
            self |= (p > 0 && g.edges[e].dst == s);
        } else {
          for (EdgeId e : g.out[s]) self |= (g.edges[e].dst == s);
        }
        ok = self;
      }
      if (ok) found.push_back(std::move(kept));
      continue;
    }

    std::vector<std::vector<StateId>> parts(scc.members.size());
    for (StateId s : kept) parts[scc.component[s]].push_back(s);
    for (auto& part : parts)
      if (!part.empty()) work.push_back(std::move(part));
  }

  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });

  std::vector<EcRecord> result;
  for (auto& states : found) {
    EcRecord ec;
    ec.states = std::move(states);
    std::vector<bool> in(n, false);
    for (StateId s : ec.states) in[s] = true;
    for (StateId s : ec.states) {
      if (mdp.stochastic(s)) {
        for (const auto& [e, p] : mdp.row[s].entries)
          if (p > 0) ec.internal_edges.push_back(e);
      } else {
        for (EdgeId e : g.out[s])
          if (in[g.edges[e].dst]) ec.internal_edges.push_back(e);
      }
    }
    std::sort(ec.internal_edges.begin(), ec.internal_edges.end());
    ec.gain = ec_optimal_gain(mdp, ec.states);
    result.push_back(std::move(ec));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Optimal gain inside one end component: multichain policy iteration with
// exact (gain, bias) evaluation; improvement is lexicographic.

Rat ec_optimal_gain(const Mdp& mdp, const std::vector<StateId>& ec_states,
                    std::vector<EdgeId>* policy_out) {
  const GameGraph& g = mdp.g;
  const size_t n = g.num_states();
  std::vector<uint32_t> local(n, kNoNode);
  for (uint32_t i = 0; i < ec_states.size(); ++i) local[ec_states[i]] = i;
  const size_t k = ec_states.size();

  std::vector<std::vector<EdgeId>> choices(k);
  for (size_t i = 0; i < k; ++i) {
    StateId s = ec_states[i];
    if (mdp.stochastic(s)) continue;
    for (EdgeId e : g.out[s])
      if (local[g.edges[e].dst] != kNoNode) choices[i].push_back(e);
    if (choices[i].empty())
      throw ModelError(ModelError::Kind::NotAWec,
                       "state " + g.states[s].name +
                           " has no internal edge in the end component");
  }

  std::vector<EdgeId> pol(k, kNoEdge);
  for (size_t i = 0; i < k; ++i)
    if (!choices[i].empty()) pol[i] = choices[i][0];

  GainBias gb;
  for (size_t round = 0;; ++round) {
    if (round > 100000)
      throw ModelError(ModelError::Kind::Internal, "gain iteration diverges");
    std::vector<std::vector<ChainEdge>> trans(k);
    for (size_t i = 0; i < k; ++i) {
      StateId s = ec_states[i];
      if (mdp.stochastic(s)) {
        for (const auto& [e, p] : mdp.row[s].entries)
          if (p > 0)
            trans[i].push_back(ChainEdge{local[g.edges[e].dst], p, g.edges[e].weight});
      } else {
        trans[i].push_back(ChainEdge{local[g.edges[pol[i]].dst], Rat(1),
                                     g.edges[pol[i]].weight});
      }
    }
    gb = evaluate_gain_bias(trans);

    bool changed = false;
    for (size_t i = 0; i < k; ++i) {
      if (choices[i].empty()) continue;
      // gain improvement first, then bias improvement among gain-neutral edges
      EdgeId cur = pol[i];
      Rat cur_gain = gb.gain[local[g.edges[cur].dst]];
      EdgeId best = kNoEdge;
      Rat best_gain;
      for (EdgeId e : choices[i]) {
        Rat cg = gb.gain[local[g.edges[e].dst]];
        if (best == kNoEdge || cg > best_gain) {
          best = e;
          best_gain = cg;
        }
      }
      if (best_gain > cur_gain) {
        pol[i] = best;
        changed = true;
        continue;
      }
      Rat cur_rhs = rat_of_int64(g.edges[cur].weight) + gb.bias[local[g.edges[cur].dst]];
      EdgeId bbest = kNoEdge;
      Rat bbest_rhs;
      for (EdgeId e : choices[i]) {
        if (gb.gain[local[g.edges[e].dst]] != cur_gain) continue;
        Rat rhs = rat_of_int64(g.edges[e].weight) + gb.bias[local[g.edges[e].dst]];
        if (bbest == kNoEdge || rhs > bbest_rhs) {
          bbest = e;
          bbest_rhs = rhs;
        }
      }
      if (bbest != kNoEdge && bbest_rhs > cur_rhs) {
        pol[i] = bbest;
        changed = true;
      }
    }
    if (!changed) break;
  }

  for (size_t i = 1; i < k; ++i)
    if (gb.gain[i] != gb.gain[0])
      throw ModelError(ModelError::Kind::Internal,
                       "gain not constant across an end component");

  if (policy_out) {
    policy_out->assign(n, kNoEdge);
    for (size_t i = 0; i < k; ++i)
      if (pol[i] != kNoEdge) (*policy_out)[ec_states[i]] = pol[i];
  }
  return gb.gain[0];
}

// ---------------------------------------------------------------------------
// Maximal expected mean payoff of a full MDP.

MdpSolution expected_mp_optimal(const Mdp& mdp) {
  const GameGraph& g = mdp.g;
  const size_t n = g.num_states();
  std::vector<EcRecord> mecs = mec_decomposition(mdp);

  std::vector<uint32_t> mec_of(n, kNoNode);
  for (uint32_t i = 0; i < mecs.size(); ++i)
    for (StateId s : mecs[i].states) mec_of[s] = i;

  std::vector<bool> stochastic_only(mecs.size(), true);
  for (uint32_t i = 0; i < mecs.size(); ++i)
    for (StateId s : mecs[i].states)
      if (!mdp.stochastic(s)) stochastic_only[i] = false;

  // Problem nodes: one per state (all-stochastic-MEC states become
  // terminals carrying the MEC gain), plus one commit terminal per MEC.
  ReachOptProblem prob;
  prob.nodes.resize(n);
  std::vector<uint32_t> done_of(mecs.size(), kNoNode);
  for (uint32_t i = 0; i < mecs.size(); ++i) {
    if (stochastic_only[i]) continue;
    done_of[i] = static_cast<uint32_t>(prob.nodes.size());
    ReachOptProblem::Node t;
    t.kind = ReachOptProblem::Kind::Terminal;
    t.reward = mecs[i].gain;
    prob.nodes.push_back(std::move(t));
  }

  // succ index -> edge id (or commit) per P1 state
  std::vector<std::vector<EdgeId>> succ_edge(n);
  for (StateId s = 0; s < n; ++s) {
    auto& node = prob.nodes[s];
    if (mec_of[s] != kNoNode && stochastic_only[mec_of[s]]) {
      node.kind = ReachOptProblem::Kind::Terminal;
      node.reward = mecs[mec_of[s]].gain;
    } else if (mdp.stochastic(s)) {
      node.kind = ReachOptProblem::Kind::Stochastic;
      for (const auto& [e, p] : mdp.row[s].entries)
        if (p > 0) node.dist.push_back({g.edges[e].dst, p});
    } else {
      node.kind = ReachOptProblem::Kind::Decision;
      for (EdgeId e : g.out[s]) {
        node.succs.push_back(g.edges[e].dst);
        succ_edge[s].push_back(e);
      }
      if (mec_of[s] != kNoNode) {
        node.succs.push_back(done_of[mec_of[s]]);
        succ_edge[s].push_back(kNoEdge);  // commit marker
      }
    }
  }

  ReachOptResult ro = maximize_terminal_reward(prob);
  for (StateId s = 0; s < n; ++s)
    if (!ro.region[s])
      throw ModelError(ModelError::Kind::Internal,
                       "mean-payoff reachability region incomplete");

  MdpSolution sol;
  sol.value.resize(n);
  sol.finite.assign(n, true);
  sol.policy.assign(n, kNoEdge);
  for (StateId s = 0; s < n; ++s) sol.value[s] = ro.value[s];

  // Witness: components whose chosen exit is a commit play the internal
  // gain-optimal policy; everything else follows the routed choice.
  std::vector<std::vector<EdgeId>> mec_policy(mecs.size());
  std::vector<bool> committed(mecs.size(), false);
  for (uint32_t c = 0; c < ro.mec_exit.size(); ++c) {
    auto [x, j] = ro.mec_exit[c];
    if (x == kNoNode) continue;
    if (succ_edge[x][j] == kNoEdge) {
      uint32_t i = mec_of[x];
      committed[c] = true;
      ec_optimal_gain(mdp, mecs[i].states, &mec_policy[c]);
    }
  }
  for (StateId s = 0; s < n; ++s) {
    if (mdp.stochastic(s) || prob.nodes[s].kind != ReachOptProblem::Kind::Decision)
      continue;
    uint32_t c = ro.mec_id[s];
    if (c != kNoNode && committed[c]) {
      sol.policy[s] = mec_policy[c][s];
    } else if (ro.choice[s] != kNoNode) {
      sol.policy[s] = succ_edge[s][ro.choice[s]];
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Minimal expected cost to target.

namespace {

// Almost-sure reachability region for an MDP, with a witness edge per P1
// state that entered the inner fixpoint.
struct Prob1 {
  std::vector<bool> region;
  std::vector<EdgeId> entry;  // rank-decreasing witness edges
};

Prob1 prob1e(const Mdp& mdp, const std::vector<bool>& target) {
  const GameGraph& g = mdp.g;
  const size_t n = g.num_states();
  std::vector<bool> y(n, true);
  Prob1 out;
  while (true) {
    std::vector<bool> z(n, false);
    std::vector<EdgeId> entry(n, kNoEdge);
    for (StateId s = 0; s < n; ++s)
      if (y[s] && target[s]) z[s] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (StateId s = 0; s < n; ++s) {
        if (z[s] || !y[s]) continue;
        if (mdp.stochastic(s)) {
          bool stays = true, hits = false;
          for (const auto& [e, p] : mdp.row[s].entries) {
            if (p <= 0) continue;
            stays &= y[g.edges[e].dst];
            hits |= z[g.edges[e].dst];
          }
          if (stays && hits) {
            z[s] = true;
            grew = true;
          }
        } else {
          for (EdgeId e : g.out[s]) {
            if (z[g.edges[e].dst]) {
              z[s] = true;
              entry[s] = e;
              grew = true;
              break;
            }
          }
        }
      }
    }
    if (z == y) {
      out.region = std::move(y);
      out.entry = std::move(entry);
      return out;
    }
    y = std::move(z);
  }
}

}  // namespace

MdpSolution expected_ssp_optimal(const Mdp& mdp, const std::vector<bool>& target) {
  const GameGraph& g = mdp.g;
  const size_t n = g.num_states();
  for (const Edge& e : g.edges)
    if (e.weight <= 0 && !(e.src < target.size() && target[e.src]))
      throw ModelError(ModelError::Kind::InvalidQuery,
                       "expected cost needs strictly positive weights");

  Prob1 p1 = prob1e(mdp, target);
  MdpSolution sol;
  sol.value.resize(n);
  sol.finite = p1.region;
  sol.policy.assign(n, kNoEdge);

  std::vector<StateId> w_states;
  std::vector<uint32_t> local(n, kNoNode);
  for (StateId s = 0; s < n; ++s) {
    if (p1.region[s]) {
      local[s] = static_cast<uint32_t>(w_states.size());
      w_states.push_back(s);
    }
  }
  if (w_states.empty()) return sol;

  const size_t k = w_states.size();
  std::vector<std::vector<EdgeId>> choices(k);
  std::vector<EdgeId> pol(k, kNoEdge);
  for (size_t i = 0; i < k; ++i) {
    StateId s = w_states[i];
    if (target[s] || mdp.stochastic(s)) continue;
    for (EdgeId e : g.out[s])
      if (local[g.edges[e].dst] != kNoNode) choices[i].push_back(e);
    pol[i] = p1.entry[s];
    if (pol[i] == kNoEdge)
      throw ModelError(ModelError::Kind::Internal, "missing prob1 witness edge");
  }

  std::vector<Rat> value;
  for (size_t round = 0;; ++round) {
    if (round > 100000)
      throw ModelError(ModelError::Kind::Internal, "ssp iteration diverges");
    std::vector<std::vector<ChainEdge>> trans(k);
    std::vector<bool> absorbing(k, false);
    std::vector<Rat> boundary(k), step(k);
    for (size_t i = 0; i < k; ++i) {
      StateId s = w_states[i];
      if (target[s]) {
        absorbing[i] = true;
        continue;
      }
      if (mdp.stochastic(s)) {
        for (const auto& [e, p] : mdp.row[s].entries)
          if (p > 0)
            trans[i].push_back(ChainEdge{local[g.edges[e].dst], p, g.edges[e].weight});
      } else {
        trans[i].push_back(
            ChainEdge{local[g.edges[pol[i]].dst], Rat(1), g.edges[pol[i]].weight});
      }
      for (const ChainEdge& e : trans[i])
        step[i] += e.prob * rat_of_int64(e.weight);
    }
    value = expected_to_absorption(trans, absorbing, boundary, step);

    bool changed = false;
    for (size_t i = 0; i < k; ++i) {
      if (choices[i].empty()) continue;
      Rat cur = rat_of_int64(g.edges[pol[i]].weight) +
                value[local[g.edges[pol[i]].dst]];
      EdgeId pick = pol[i];
      Rat best = cur;
      for (EdgeId e : choices[i]) {
        Rat cand = rat_of_int64(g.edges[e].weight) + value[local[g.edges[e].dst]];
        if (cand < best) {
          best = cand;
          pick = e;
        }
      }
      if (pick != pol[i]) {
        pol[i] = pick;
        changed = true;
      }
    }
    if (!changed) break;
  }

  for (size_t i = 0; i < k; ++i) {
    sol.value[w_states[i]] = value[i];
    if (pol[i] != kNoEdge) sol.policy[w_states[i]] = pol[i];
  }
  return sol;
}

}  // namespace bwcs
