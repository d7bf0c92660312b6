#include "bwcs/model.hpp"

#include <algorithm>
#include <queue>

namespace bwcs {

StateId GameGraph::add_state(std::string name, Owner owner) {
  states.push_back(State{std::move(name), owner});
  out.emplace_back();
  is_target.push_back(false);
  return static_cast<StateId>(states.size() - 1);
}

EdgeId GameGraph::add_edge(StateId src, StateId dst, int64_t weight, std::string label) {
  if (src >= states.size() || dst >= states.size())
    throw ModelError(ModelError::Kind::DanglingEdge, "edge endpoint out of range");
  EdgeId id = static_cast<EdgeId>(edges.size());
  edges.push_back(Edge{src, dst, weight, std::move(label)});
  out[src].push_back(id);
  return id;
}

void GameGraph::set_target(StateId s, bool v) {
  if (s >= states.size())
    throw ModelError(ModelError::Kind::UnknownState, "target state out of range");
  is_target[s] = v;
}

std::vector<StateId> GameGraph::target_set() const {
  std::vector<StateId> t;
  for (StateId s = 0; s < states.size(); ++s)
    if (is_target[s]) t.push_back(s);
  return t;
}

int64_t GameGraph::max_abs_weight() const {
  int64_t w = 0;
  for (const Edge& e : edges) w = std::max(w, e.weight < 0 ? -e.weight : e.weight);
  return w;
}

EdgeId GameGraph::resolve_out_edge(StateId src, const std::string& ref) const {
  for (EdgeId e : out[src])
    if (!edges[e].label.empty() && edges[e].label == ref) return e;
  EdgeId found = kNoEdge;
  for (EdgeId e : out[src]) {
    if (states[edges[e].dst].name == ref) {
      if (found != kNoEdge) return kNoEdge;  // ambiguous destination
      found = e;
    }
  }
  return found;
}

Rat Distribution::total() const {
  Rat sum;
  for (const auto& [e, p] : entries) sum += p;
  return sum;
}

EdgeId FiniteMemoryStrategy::action_at(MemoryId m, StateId s) const {
  EdgeId e = action[m][s];
  if (e == kNoEdge)
    throw ModelError(ModelError::Kind::UndefinedAction,
                     "no action at memory " + std::to_string(m) + ", state " +
                         std::to_string(s));
  return e;
}

MemoryId FiniteMemoryStrategy::add_memory(std::string name, size_t num_states,
                                          size_t num_edges) {
  MemoryId m = static_cast<MemoryId>(memory_names.size());
  memory_names.push_back(std::move(name));
  action.emplace_back(num_states, kNoEdge);
  update.emplace_back(num_edges, m);  // identity update by default
  return m;
}

FiniteMemoryStrategy FiniteMemoryStrategy::memoryless(
    const GameGraph& g, const std::vector<EdgeId>& choice) {
  FiniteMemoryStrategy s;
  s.add_memory("m0", g.num_states(), g.edges.size());
  for (StateId v = 0; v < g.num_states(); ++v) {
    if (v < choice.size() && choice[v] != kNoEdge) {
      if (g.edges[choice[v]].src != v)
        throw ModelError(ModelError::Kind::UndefinedAction,
                         "memoryless choice is not an out-edge of its state");
      s.action[0][v] = choice[v];
    }
  }
  return s;
}

GameGraph validate_game(GameGraph g, Measure measure) {
  g.measure = measure;
  if (g.states.empty())
    throw ModelError(ModelError::Kind::UnknownState, "game has no states");
  if (g.initial >= g.states.size())
    throw ModelError(ModelError::Kind::UnknownState, "initial state out of range");
  for (const Edge& e : g.edges) {
    if (e.src >= g.states.size() || e.dst >= g.states.size())
      throw ModelError(ModelError::Kind::DanglingEdge, "edge endpoint out of range");
    if (measure == Measure::ShortestPath && e.weight <= 0)
      throw ModelError(ModelError::Kind::NonPositiveWeight,
                       "shortest-path weight must be positive on edge " +
                           g.states[e.src].name + " -> " + g.states[e.dst].name);
  }
  for (StateId s = 0; s < g.states.size(); ++s) {
    bool sink_ok = measure == Measure::ShortestPath && g.target(s);
    if (g.out[s].empty() && !sink_ok)
      throw ModelError(ModelError::Kind::BlockingState,
                       "state " + g.states[s].name + " has no outgoing edge");
  }
  if (measure == Measure::ShortestPath && g.target_set().empty())
    throw ModelError(ModelError::Kind::InvalidQuery,
                     "shortest-path game needs a nonempty target set");
  return g;
}

static void check_row(const GameGraph& g, StateId s, const Distribution& d) {
  Rat sum = d.total();
  if (sum != 1)
    throw ModelError(ModelError::Kind::ProbabilityNotOne,
                     "row of " + g.states[s].name + " sums to " +
                         to_fraction_string(sum));
  for (const auto& [e, p] : d.entries) {
    if (e >= g.edges.size() || g.edges[e].src != s)
      throw ModelError(ModelError::Kind::UnknownEdge,
                       "row of " + g.states[s].name + " references a foreign edge");
    if (p < 0)
      throw ModelError(ModelError::Kind::ProbabilityNotOne,
                       "negative probability in row of " + g.states[s].name);
  }
}

Mdp apply_model(const GameGraph& g, const StochasticModel& m) {
  Mdp mdp;
  mdp.g = g;
  mdp.row.resize(g.num_states());
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.states[s].owner != Owner::P2) continue;
    auto it = m.rows.find(s);
    if (it != m.rows.end()) {
      check_row(g, s, it->second);
      mdp.row[s] = it->second;
    } else if (g.out[s].size() == 1) {
      mdp.row[s].entries.emplace_back(g.out[s][0], Rat(1));
    } else if (g.out[s].empty() && g.measure == Measure::ShortestPath && g.target(s)) {
      // target sink: never left, no row needed
    } else {
      throw ModelError(ModelError::Kind::MissingRow,
                       "model has no row for P2 state " + g.states[s].name);
    }
  }
  return mdp;
}

MarkovChain apply_strategy(const Mdp& mdp, const FiniteMemoryStrategy& s) {
  const GameGraph& g = mdp.g;
  MarkovChain mc;
  std::map<std::pair<MemoryId, StateId>, uint32_t> index;

  auto node_of = [&](MemoryId m, StateId v) {
    auto [it, inserted] = index.try_emplace({m, v}, static_cast<uint32_t>(mc.nodes.size()));
    if (inserted) {
      mc.nodes.push_back(ChainNode{m, v});
      mc.trans.emplace_back();
    }
    return it->second;
  };

  mc.initial = node_of(s.initial_memory, g.initial);
  std::queue<uint32_t> work;
  work.push(mc.initial);
  std::vector<bool> expanded;

  while (!work.empty()) {
    uint32_t n = work.front();
    work.pop();
    if (n < expanded.size() && expanded[n]) continue;
    if (n >= expanded.size()) expanded.resize(mc.nodes.size(), false);
    if (expanded[n]) continue;
    expanded[n] = true;
    MemoryId m = mc.nodes[n].mem;
    StateId v = mc.nodes[n].state;

    auto push_edge = [&](EdgeId e, const Rat& p) {
      MemoryId m2 = s.update_at(m, e);
      uint32_t t = node_of(m2, g.edges[e].dst);
      mc.trans[n].push_back(ChainEdge{t, p, g.edges[e].weight});
      if (t >= expanded.size() || !expanded[t]) work.push(t);
      expanded.resize(mc.nodes.size(), false);
    };

    if (mdp.stochastic(v)) {
      for (const auto& [e, p] : mdp.row[v].entries)
        if (p > 0) push_edge(e, p);
    } else if (g.out[v].empty() && g.measure == Measure::ShortestPath && g.target(v)) {
      mc.trans[n].push_back(ChainEdge{n, Rat(1), 0});  // absorb at target sink
    } else {
      push_edge(s.action_at(m, v), Rat(1));
    }
  }
  return mc;
}

std::pair<GameGraph, StochasticModel> compose_finite_memory_model(
    const GameGraph& g, const FiniteMemoryModel& fm) {
  GameGraph prod;
  prod.measure = g.measure;
  StochasticModel model;

  std::map<std::pair<StateId, MemoryId>, StateId> index;
  std::vector<std::pair<StateId, MemoryId>> origin;

  auto node_of = [&](StateId s, MemoryId m) {
    auto [it, inserted] = index.try_emplace({s, m}, StateId(prod.states.size()));
    if (inserted) {
      prod.add_state(g.states[s].name + "#" + fm.memory_names[m], g.states[s].owner);
      prod.set_target(it->second, g.target(s));
      origin.push_back({s, m});
    }
    return it->second;
  };

  StateId init = node_of(g.initial, fm.initial_memory);
  prod.initial = init;

  std::vector<bool> done;
  std::queue<StateId> work;
  work.push(init);
  while (!work.empty()) {
    StateId n = work.front();
    work.pop();
    if (n < done.size() && done[n]) continue;
    done.resize(prod.states.size(), false);
    if (done[n]) continue;
    done[n] = true;
    auto [s, m] = origin[n];

    Distribution row;
    const Distribution* src_row = nullptr;
    if (g.states[s].owner == Owner::P2) {
      auto it = fm.rows[m].find(s);
      if (it == fm.rows[m].end()) {
        if (g.out[s].size() != 1)
          throw ModelError(ModelError::Kind::MissingRow,
                           "finite-memory model has no row for " + g.states[s].name +
                               " in memory " + fm.memory_names[m]);
      } else {
        check_row(g, s, it->second);
        src_row = &it->second;
      }
    }

    for (EdgeId e : g.out[s]) {
      const Edge& edge = g.edges[e];
      MemoryId m2 = fm.update[m][edge.dst];
      StateId t = node_of(edge.dst, m2);
      EdgeId pe = prod.add_edge(n, t, edge.weight, edge.label);
      if (src_row) {
        for (const auto& [re, p] : src_row->entries)
          if (re == e && p > 0) row.entries.emplace_back(pe, p);
      }
      done.resize(prod.states.size(), false);
      if (!done[t]) work.push(t);
    }
    if (g.states[s].owner == Owner::P2 && src_row) model.rows[n] = std::move(row);
  }
  return {std::move(prod), std::move(model)};
}

}  // namespace bwcs
