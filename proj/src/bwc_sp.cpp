#include "bwcs/bwc_sp.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "bwcs/expectation.hpp"
#include "bwcs/verify.hpp"
#include "bwcs/worst_case.hpp"

namespace bwcs {

namespace {

constexpr int64_t kTopCost = -1;

std::string unfolded_name(const GameGraph& g, StateId s, int64_t cost) {
  return g.states[s].name +
         (cost == kTopCost ? ",T" : "," + std::to_string(cost));
}

}  // namespace

StateId UnfoldedGame::node(StateId orig_state, int64_t c) const {
  for (StateId s = 0; s < g.num_states(); ++s)
    if (orig[s] == orig_state && cost[s] == c) return s;
  return kNoNode;
}

UnfoldedGame unfold(const GameGraph& g, int64_t mu) {
  if (mu < 1)
    throw ModelError(ModelError::Kind::InvalidQuery,
                     "worst-case threshold must be at least 1");
  if (static_cast<int64_t>(g.num_states()) * (mu + 1) > 5000000)
    throw ModelError(ModelError::Kind::Overflow, "unfolding would be too large");

  UnfoldedGame u;
  u.g.measure = Measure::ShortestPath;
  std::map<std::pair<StateId, int64_t>, StateId> index;

  auto node_of = [&](StateId s, int64_t c) {
    auto [it, inserted] = index.try_emplace({s, c}, StateId(u.g.num_states()));
    if (inserted) {
      u.g.add_state(unfolded_name(g, s, c), g.states[s].owner);
      u.orig.push_back(s);
      u.cost.push_back(c);
      bool is_dbl = c != kTopCost && g.target(s);
      u.dbl.push_back(is_dbl);
      u.top.push_back(c == kTopCost);
      u.g.set_target(it->second, is_dbl);
    }
    return it->second;
  };

  StateId init = node_of(g.initial, 0);
  u.g.initial = init;
  std::queue<StateId> work;
  work.push(init);
  std::vector<bool> done;
  while (!work.empty()) {
    StateId n = work.front();
    work.pop();
    done.resize(u.g.num_states(), false);
    if (done[n]) continue;
    done[n] = true;

    if (u.dbl[n] || u.top[n]) {
      u.g.add_edge(n, n, 0);  // terminal; excluded from cost accounting
      u.edge_orig.push_back(kNoEdge);
      continue;
    }
    StateId s = u.orig[n];
    for (EdgeId e : g.out[s]) {
      int64_t c2 = u.cost[n] + g.edges[e].weight;
      StateId t = node_of(g.edges[e].dst, c2 < mu ? c2 : kTopCost);
      u.g.add_edge(n, t, g.edges[e].weight, g.edges[e].label);
      u.edge_orig.push_back(e);
      done.resize(u.g.num_states(), false);
      if (!done[t]) work.push(t);
    }
  }
  return u;
}

SafeSubgame safe_region(const UnfoldedGame& u) {
  SafeSubgame sr;
  sr.region = attractor(u.g, u.dbl, Owner::P1);
  // P2 nodes of the attractor keep all their edges inside it; anything else
  // would let the adversary escape the region.
  for (StateId s = 0; s < u.g.num_states(); ++s) {
    if (!sr.region[s] || u.g.states[s].owner != Owner::P2) continue;
    for (EdgeId e : u.g.out[s])
      if (!sr.region[u.g.edges[e].dst])
        throw ModelError(ModelError::Kind::Internal,
                         "safe region not closed under adversary moves");
  }
  return sr;
}

SpSynthesisResult synthesize_bwc_sp(const GameGraph& g, const StochasticModel& m,
                                    int64_t mu, const Rat& nu) {
  if (g.measure != Measure::ShortestPath)
    throw ModelError(ModelError::Kind::InvalidQuery,
                     "shortest-path synthesis needs a shortest-path game");
  (void)apply_model(g, m);  // row validation up front

  SpSynthesisResult res;
  UnfoldedGame u = unfold(g, mu);
  SafeSubgame sr = safe_region(u);
  res.unfolding_states = u.g.num_states();
  res.region_states = static_cast<size_t>(
      std::count(sr.region.begin(), sr.region.end(), true));

  if (!sr.region[u.g.initial]) {
    res.reason = "worst-case requirement unsatisfiable";
    return res;
  }

  // Safe subgame: region states only, P1 restricted to edges into the
  // region. Stochastic rows project edge-by-edge onto the unfolding.
  std::vector<StateId> members;
  std::vector<uint32_t> local(u.g.num_states(), kNoNode);
  for (StateId s = 0; s < u.g.num_states(); ++s)
    if (sr.region[s]) {
      local[s] = static_cast<uint32_t>(members.size());
      members.push_back(s);
    }

  Mdp sub;
  sub.g.measure = Measure::ShortestPath;
  std::vector<EdgeId> sub_edge_orig;  // sub edge -> original game edge
  for (StateId s : members) {
    sub.g.add_state(u.g.states[s].name, u.g.states[s].owner);
    sub.g.set_target(local[s], u.dbl[s]);
  }
  sub.g.initial = local[u.g.initial];
  std::vector<std::map<EdgeId, EdgeId>> by_orig(members.size());
  for (size_t i = 0; i < members.size(); ++i) {
    StateId s = members[i];
    if (u.dbl[s]) continue;  // terminal in the subgame
    for (EdgeId e : u.g.out[s]) {
      StateId t = u.g.edges[e].dst;
      if (local[t] == kNoNode) continue;  // P1 edge out of the region
      EdgeId se = sub.g.add_edge(static_cast<StateId>(i), local[t],
                                 u.g.edges[e].weight, u.g.edges[e].label);
      sub_edge_orig.push_back(u.edge_orig[e]);
      if (u.edge_orig[e] != kNoEdge) by_orig[i][u.edge_orig[e]] = se;
    }
  }
  sub.row.resize(sub.g.num_states());
  for (size_t i = 0; i < members.size(); ++i) {
    StateId s = members[i];
    if (u.g.states[s].owner != Owner::P2 || u.dbl[s]) continue;
    StateId os = u.orig[s];
    auto it = m.rows.find(os);
    if (it != m.rows.end()) {
      for (const auto& [oe, p] : it->second.entries) {
        auto se = by_orig[i].find(oe);
        if (se == by_orig[i].end())
          throw ModelError(ModelError::Kind::Internal,
                           "stochastic edge missing from the safe region");
        sub.row[i].entries.emplace_back(se->second, p);
      }
    } else if (g.out[os].size() == 1) {
      sub.row[i].entries.emplace_back(by_orig[i].at(g.out[os][0]), Rat(1));
    } else {
      throw ModelError(ModelError::Kind::MissingRow,
                       "model has no row for P2 state " + g.states[os].name);
    }
  }

  std::vector<bool> dbl_local(sub.g.num_states(), false);
  for (size_t i = 0; i < members.size(); ++i) dbl_local[i] = u.dbl[members[i]];
  MdpSolution ssp = expected_ssp_optimal(sub, dbl_local);
  if (!ssp.finite[sub.g.initial])
    throw ModelError(ModelError::Kind::Internal,
                     "safe region does not reach the targets almost surely");
  res.expectation = ssp.value[sub.g.initial];

  if (!(*res.expectation < nu)) {
    res.reason = "no safe strategy beats the expectation threshold";
    return res;
  }

  // Fold back: memory tracks the accumulated cost, saturating at mu. The
  // saturated memory is only reachable after the target (or never).
  FiniteMemoryStrategy fold;
  std::vector<MemoryId> mem_of_cost(mu + 1);
  for (int64_t c = 0; c < mu; ++c)
    mem_of_cost[c] = fold.add_memory("c" + std::to_string(c), g.num_states(),
                                     g.edges.size());
  MemoryId sat = fold.add_memory("sat", g.num_states(), g.edges.size());
  mem_of_cost[mu] = sat;

  std::map<std::pair<StateId, int64_t>, StateId> unfolded_at;
  for (StateId s = 0; s < u.g.num_states(); ++s)
    unfolded_at[{u.orig[s], u.cost[s]}] = s;

  for (MemoryId mem = 0; mem < fold.memory_size(); ++mem) {
    int64_t c = mem == sat ? mu : static_cast<int64_t>(mem);
    for (EdgeId e = 0; e < g.edges.size(); ++e) {
      int64_t c2 = std::min<int64_t>(mu, c + g.edges[e].weight);
      fold.update[mem][e] = mem_of_cost[c2];
    }
    for (StateId s = 0; s < g.num_states(); ++s) {
      if (g.states[s].owner != Owner::P1 || g.out[s].empty()) continue;
      // Pairs outside the safe region are only reachable after the target
      // (the policy keeps pre-target play inside R), so any edge will do.
      EdgeId pick = g.out[s][0];
      if (mem != sat) {
        auto it = unfolded_at.find({s, c});
        if (it != unfolded_at.end() && local[it->second] != kNoNode &&
            !dbl_local[local[it->second]] &&
            ssp.policy[local[it->second]] != kNoEdge)
          pick = sub_edge_orig[ssp.policy[local[it->second]]];
      }
      fold.action[mem][s] = pick;
    }
  }
  fold.initial_memory = mem_of_cost[0];

  Certificate wc = verify_worst_case_sp(g, fold, mu);
  if (!wc.pass || wc.infinite)
    throw ModelError(ModelError::Kind::Internal,
                     "folded strategy failed its worst-case certificate");
  res.verified_worst_case = wc.value.get_num().get_si();

  std::optional<Rat> exp = exact_expectation(g, m, fold);
  if (!exp || *exp != *res.expectation)
    throw ModelError(ModelError::Kind::Internal,
                     "folded strategy expectation mismatch");

  res.yes = true;
  res.strategy = std::move(fold);
  return res;
}

}  // namespace bwcs
