#pragma once

#include <optional>
#include <vector>

#include "bwcs/model.hpp"

namespace bwcs {

/// Values and optimal memoryless choices of a two-player game.
/// Mean-payoff: value[s] is the optimal mean P1 can force from s (inf-limit),
/// finite everywhere. Shortest path: value[s] is the optimal worst-case cost
/// to the target set, finite iff finite[s].
struct GameValueTable {
  std::vector<Rat> value;
  std::vector<bool> finite;
  std::vector<EdgeId> p1_choice;  // per P1 state (kNoEdge where irrelevant)
  std::vector<EdgeId> p2_choice;  // per P2 state
};

/// Least set from which `player` can force reaching X: own states with some
/// successor inside, opponent states with all successors inside. States
/// without outgoing edges never join (beyond X itself).
std::vector<bool> attractor(const GameGraph& g, const std::vector<bool>& x,
                            Owner player);

/// Optimal mean-payoff per state (both players memoryless optimal). Value
/// iteration with the classical pseudo-polynomial step bound, then exact
/// value recovery as the unique rational with denominator <= |states|;
/// strategies extracted per value class via energy progress measures.
/// Ties always break toward the lowest edge index.
GameValueTable solve_mp_game(const GameGraph& g);

/// Worst-case cost to reach the game's target set: backward induction to the
/// fixpoint of min/max Bellman updates. finite[s] iff s is in the P1
/// attractor of T. The P1 choice is cycle-free on the winning region.
GameValueTable solve_sp_worst_case(const GameGraph& g);

// Plain weighted digraph for cycle analysis.
struct DigraphEdge {
  uint32_t to = 0;
  int64_t weight = 0;
};
using Digraph = std::vector<std::vector<DigraphEdge>>;

struct CycleMean {
  Rat mean;
  std::vector<uint32_t> cycle;  // nodes, cycle.front() == successor of back()
  std::vector<uint32_t> path;   // from the query node to cycle.front()
};

/// Minimum mean over cycles reachable from `from` (Karp's algorithm, one
/// run per reachable SCC); nullopt when no cycle is reachable.
std::optional<CycleMean> min_cycle_mean(const Digraph& g, uint32_t from);

}  // namespace bwcs
