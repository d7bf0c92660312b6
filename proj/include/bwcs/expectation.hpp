#pragma once

#include <optional>
#include <vector>

#include "bwcs/model.hpp"

namespace bwcs {

/// End component: states strongly connected through internal edges, with the
/// whole support of every stochastic member inside. `gain` is the optimal
/// expected mean payoff achievable while staying inside (constant across the
/// component).
struct EcRecord {
  std::vector<StateId> states;         // ascending
  std::vector<EdgeId> internal_edges;  // P1 internal edges + support edges
  Rat gain;
};

/// Inclusion-maximal end components, pairwise disjoint, deterministic order.
std::vector<EcRecord> mec_decomposition(const Mdp& mdp);

/// Same, restricted to a state subset (states outside are treated as absent).
std::vector<EcRecord> mec_decomposition(const Mdp& mdp,
                                        const std::vector<bool>& allowed);

/// Optimal expected mean payoff inside one end component and a memoryless
/// internal policy achieving it from every member. Exact policy iteration
/// with multichain (gain, bias) evaluation.
Rat ec_optimal_gain(const Mdp& mdp, const std::vector<StateId>& ec_states,
                    std::vector<EdgeId>* policy = nullptr);

struct MdpSolution {
  std::vector<Rat> value;     // per state; valid where finite[s]
  std::vector<bool> finite;
  std::vector<EdgeId> policy;  // per P1 state; kNoEdge where no choice exists
};

/// Maximal expected mean payoff per state with a memoryless witness:
/// per-MEC gains first, then exact optimization of the expected gain of the
/// end component the play settles in.
MdpSolution expected_mp_optimal(const Mdp& mdp);

/// Minimal expected cost to reach the target set (strictly positive
/// weights). States that cannot reach the target with probability 1 under
/// any strategy get finite[s] = false. Exact policy iteration over the
/// almost-sure winning region.
MdpSolution expected_ssp_optimal(const Mdp& mdp,
                                 const std::vector<bool>& target);

/// Exact expected mean payoff of a chain from its initial node: bottom-SCC
/// gains combined with exact absorption probabilities.
Rat mc_expected_mp(const MarkovChain& mc);

/// Exact expected total weight until a node whose game state is in the
/// target set is first entered; nullopt iff that happens with probability
/// less than 1.
std::optional<Rat> mc_expected_total_cost(const MarkovChain& mc,
                                          const std::vector<bool>& target);

}  // namespace bwcs
