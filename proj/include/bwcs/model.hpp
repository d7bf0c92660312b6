#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bwcs/errors.hpp"
#include "bwcs/rational.hpp"

namespace bwcs {

enum class Owner : uint8_t { P1, P2 };
enum class Measure : uint8_t { MeanPayoff, ShortestPath };

using StateId = uint32_t;
using EdgeId = uint32_t;
using MemoryId = uint32_t;

constexpr EdgeId kNoEdge = UINT32_MAX;
constexpr uint32_t kNoNode = UINT32_MAX;

struct State {
  std::string name;
  Owner owner = Owner::P1;
};

struct Edge {
  StateId src = 0;
  StateId dst = 0;
  int64_t weight = 0;
  std::string label;  // optional; required to disambiguate parallel edges
};

/// Two-player weighted game graph. States are partitioned between P1
/// (the controller) and P2 (the environment); plays are infinite paths.
/// Shortest-path games carry a target set and strictly positive weights.
struct GameGraph {
  Measure measure = Measure::MeanPayoff;
  std::vector<State> states;
  std::vector<Edge> edges;
  std::vector<std::vector<EdgeId>> out;  // per state, ascending edge ids
  StateId initial = 0;
  std::vector<bool> is_target;  // per state; shortest-path only

  StateId add_state(std::string name, Owner owner);
  EdgeId add_edge(StateId src, StateId dst, int64_t weight, std::string label = "");
  void set_target(StateId s, bool v = true);

  size_t num_states() const { return states.size(); }
  bool target(StateId s) const { return s < is_target.size() && is_target[s]; }
  std::vector<StateId> target_set() const;
  int64_t max_abs_weight() const;

  /// Out-edge whose label or destination name matches `ref`; labels win.
  /// Returns kNoEdge if nothing (or more than one destination) matches.
  EdgeId resolve_out_edge(StateId src, const std::string& ref) const;
};

/// Distribution over the outgoing edges of one state; entries carry
/// exact probabilities and reference edges of the underlying game.
struct Distribution {
  std::vector<std::pair<EdgeId, Rat>> entries;

  Rat total() const;
};

/// Memoryless stochastic adversary: one row per P2 state. P2 states with a
/// single outgoing edge may omit their row (implied Dirac).
struct StochasticModel {
  std::map<StateId, Distribution> rows;
};

/// Stochastic adversary with finite memory. The memory is updated on every
/// state visit: arriving at state s in memory m moves the model to
/// update[m][s]. Rows are per (memory, P2 state).
struct FiniteMemoryModel {
  std::vector<std::string> memory_names;
  MemoryId initial_memory = 0;
  std::vector<std::vector<MemoryId>> update;        // [mem][state]
  std::vector<std::map<StateId, Distribution>> rows;  // [mem]

  size_t memory_size() const { return memory_names.size(); }
};

/// Game with P2 resolved into stochastic states: `row[s]` is nonempty
/// exactly for P2 states of the underlying graph.
struct Mdp {
  GameGraph g;
  std::vector<Distribution> row;  // indexed by state; empty for P1 states

  bool stochastic(StateId s) const { return !row[s].entries.empty(); }
};

/// Deterministic Mealy machine for P1. `action[m][s]` picks an out-edge of
/// every P1 state s, `update[m][e]` advances the memory when edge e is taken
/// (by either player). Unset actions are kNoEdge and only legal on pairs the
/// play can never reach.
struct FiniteMemoryStrategy {
  std::vector<std::string> memory_names;
  MemoryId initial_memory = 0;
  std::vector<std::vector<EdgeId>> action;    // [mem][state]
  std::vector<std::vector<MemoryId>> update;  // [mem][edge]

  size_t memory_size() const { return memory_names.size(); }

  EdgeId action_at(MemoryId m, StateId s) const;
  MemoryId update_at(MemoryId m, EdgeId e) const { return update[m][e]; }

  MemoryId add_memory(std::string name, size_t num_states, size_t num_edges);

  /// One-memory strategy from a per-state edge choice (kNoEdge on P2 states).
  static FiniteMemoryStrategy memoryless(const GameGraph& g,
                                         const std::vector<EdgeId>& choice);
};

/// Fully stochastic process over (memory, state) pairs, produced by fixing a
/// strategy in an MDP. Node 0 is the initial node.
struct ChainEdge {
  uint32_t to = 0;
  Rat prob;
  int64_t weight = 0;
};

struct ChainNode {
  MemoryId mem = 0;
  StateId state = 0;
};

struct MarkovChain {
  std::vector<ChainNode> nodes;
  std::vector<std::vector<ChainEdge>> trans;
  uint32_t initial = 0;

  size_t size() const { return nodes.size(); }
};

/// Thresholds of one synthesis question. `mu` is the worst-case bound
/// (strict: mean-payoff > mu, shortest-path cost < mu), `nu` the expectation
/// bound, `epsilon` the mean-payoff optimality slack.
struct SynthesisQuery {
  Measure measure = Measure::MeanPayoff;
  int64_t mu = 0;
  Rat nu;
  Rat epsilon;
};

// --- operations ---

/// Checks all GameGraph invariants for the given measure and returns the
/// graph unchanged. Shortest-path target states may be sinks; every other
/// state needs an out-edge.
GameGraph validate_game(GameGraph g, Measure measure);

/// Fixes the stochastic adversary: P2 states become stochastic states with
/// the model's rows (single-edge P2 states get implied Dirac rows).
Mdp apply_model(const GameGraph& g, const StochasticModel& m);

/// Fixes the controller: the reachable (memory, state) product becomes a
/// Markov chain. P1 choices are resolved by the strategy, stochastic rows
/// are copied, and memory advances through the strategy's update function.
MarkovChain apply_strategy(const Mdp& mdp, const FiniteMemoryStrategy& s);

/// Reduces a finite-memory adversary model to a memoryless one over the
/// synchronized product game (state, model memory). Plays of the product
/// project back to plays of the original game with identical weights.
std::pair<GameGraph, StochasticModel> compose_finite_memory_model(
    const GameGraph& g, const FiniteMemoryModel& fm);

}  // namespace bwcs
