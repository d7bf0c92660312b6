#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bwcs/model.hpp"

namespace bwcs {

/// Pseudo-polynomial expansion of a shortest-path game: states carry the
/// cost accumulated so far, capped at the worst-case threshold. Reaching a
/// target below the threshold yields a terminal "double" state; overflowing
/// yields a terminal top state. Terminals get zero-weight self-loops that
/// never count toward any value.
struct UnfoldedGame {
  GameGraph g;                  // unfolded graph (reachable part only)
  std::vector<StateId> orig;    // per unfolded state: original state
  std::vector<int64_t> cost;    // accumulated cost; -1 on top states
  std::vector<bool> dbl;        // double (target reached under threshold)
  std::vector<bool> top;        // threshold overflow
  std::vector<EdgeId> edge_orig;  // per unfolded edge: original edge (kNoEdge
                                  // for the internal terminal self-loops)

  StateId node(StateId orig_state, int64_t cost) const;  // kNoNode if absent
};

UnfoldedGame unfold(const GameGraph& g, int64_t mu);

/// Safe region R: the P1 attractor of the double states. Inside the induced
/// subgame (P1 keeps only edges into R, P2 keeps everything) every play
/// reaches a double state, whatever the adversary does.
struct SafeSubgame {
  std::vector<bool> region;  // over unfolded states
};

SafeSubgame safe_region(const UnfoldedGame& u);

struct SpSynthesisResult {
  bool yes = false;
  std::string reason;  // on No
  std::optional<Rat> expectation;          // E*: best safe expected cost
  std::optional<int64_t> verified_worst_case;
  FiniteMemoryStrategy strategy;           // present iff yes
  size_t unfolding_states = 0;
  size_t region_states = 0;
};

/// Sequential synthesis: unfold, prune to the safe region, minimize the
/// expected cost to the double states, fold the memoryless unfolding policy
/// back as a cost-counter Mealy machine, and certify both values exactly.
/// Strict thresholds: worst case < mu and expectation < nu.
SpSynthesisResult synthesize_bwc_sp(const GameGraph& g, const StochasticModel& m,
                                    int64_t mu, const Rat& nu);

}  // namespace bwcs
