#pragma once

#include <vector>

#include "bwcs/expectation.hpp"
#include "bwcs/model.hpp"

namespace bwcs {

/// Verdict for one end component against the worst-case threshold. Winning
/// means P1 can force mean payoff > mu from every member while never leaving
/// the component, with the stochastic states handed to the adversary;
/// `witness` then holds the internal P1 choice per member state.
struct EcClassification {
  bool winning = false;
  std::vector<EdgeId> witness;   // per game state, kNoEdge outside the EC
  std::vector<Rat> inner_value;  // per member, adversarial subgame values
};

EcClassification classify_ec(const GameGraph& g, const std::vector<StateId>& ec,
                             int64_t mu);

/// Inclusion-maximal end components classified Winning: decompose into
/// maximal ECs, drop losing ones down to their stay-and-win region, recurse.
/// Disjoint, deterministic order; gains are the unconstrained optima.
std::vector<EcRecord> maximal_wecs(const GameGraph& g, const StochasticModel& m,
                                   int64_t mu);

}  // namespace bwcs
