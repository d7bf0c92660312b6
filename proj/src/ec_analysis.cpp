#include "bwcs/ec_analysis.hpp"

#include <algorithm>

#include "bwcs/worst_case.hpp"

namespace bwcs {

namespace {

// Subgame induced by a state set: every game edge with both endpoints
// inside, stochastic states handed to the adversary (they already are P2
// states of the underlying graph). Returns local graph + edge mapping.
struct InducedSubgame {
  GameGraph g;
  std::vector<StateId> to_global;   // local state -> global state
  std::vector<EdgeId> edge_global;  // local edge -> global edge
  bool blocking = false;            // some member lost all its edges
};

InducedSubgame induce(const GameGraph& g, const std::vector<StateId>& states) {
  InducedSubgame sub;
  std::vector<uint32_t> local(g.num_states(), kNoNode);
  for (StateId s : states) {
    local[s] = static_cast<uint32_t>(sub.g.num_states());
    sub.g.add_state(g.states[s].name, g.states[s].owner);
    sub.to_global.push_back(s);
  }
  for (StateId s : states) {
    for (EdgeId e : g.out[s]) {
      if (local[g.edges[e].dst] == kNoNode) continue;
      sub.g.add_edge(local[s], local[g.edges[e].dst], g.edges[e].weight,
                     g.edges[e].label);
      sub.edge_global.push_back(e);
    }
  }
  for (StateId s = 0; s < sub.g.num_states(); ++s)
    if (sub.g.out[s].empty()) sub.blocking = true;
  return sub;
}

}  // namespace

EcClassification classify_ec(const GameGraph& g, const std::vector<StateId>& ec,
                             int64_t mu) {
  EcClassification out;
  out.witness.assign(g.num_states(), kNoEdge);
  if (ec.empty()) return out;

  InducedSubgame sub = induce(g, ec);
  if (sub.blocking) return out;  // losing: someone cannot stay inside

  GameValueTable t = solve_mp_game(sub.g);
  out.inner_value = t.value;
  bool winning = true;
  for (StateId s = 0; s < sub.g.num_states(); ++s)
    if (!(t.value[s] > rat_of_int64(mu))) winning = false;
  out.winning = winning;
  if (winning) {
    for (StateId s = 0; s < sub.g.num_states(); ++s)
      if (t.p1_choice[s] != kNoEdge)
        out.witness[sub.to_global[s]] = sub.edge_global[t.p1_choice[s]];
  }
  return out;
}

std::vector<EcRecord> maximal_wecs(const GameGraph& g, const StochasticModel& m,
                                   int64_t mu) {
  Mdp mdp = apply_model(g, m);
  std::vector<EcRecord> result;

  std::vector<std::vector<bool>> work;
  work.push_back(std::vector<bool>(g.num_states(), true));

  while (!work.empty()) {
    std::vector<bool> allowed = std::move(work.back());
    work.pop_back();
    for (const EcRecord& mec : mec_decomposition(mdp, allowed)) {
      EcClassification cls = classify_ec(g, mec.states, mu);
      if (cls.winning) {
        result.push_back(mec);
        continue;
      }
      // Keep only the stay-and-win region of the restricted game, where the
      // adversarial subgame value still clears the threshold, and retry.
      std::vector<bool> keep(g.num_states(), false);
      bool any = false;
      if (!cls.inner_value.empty()) {
        for (size_t i = 0; i < mec.states.size(); ++i) {
          if (cls.inner_value[i] > rat_of_int64(mu)) {
            keep[mec.states[i]] = true;
            any = true;
          }
        }
      }
      if (any) work.push_back(std::move(keep));
    }
  }

  std::sort(result.begin(), result.end(), [](const EcRecord& a, const EcRecord& b) {
    return a.states[0] < b.states[0];
  });
  return result;
}

}  // namespace bwcs
