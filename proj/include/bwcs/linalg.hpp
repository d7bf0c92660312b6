#pragma once

#include <vector>

#include "bwcs/model.hpp"

namespace bwcs {

/// Solves A x = b exactly by Gaussian elimination with nonzero pivoting.
/// Throws ModelError(Internal) on a singular matrix.
std::vector<Rat> solve_linear_system(std::vector<std::vector<Rat>> a,
                                     std::vector<Rat> b);

/// Exact fixpoint of value[u] = step[u] + sum_e p_e * value[e.to] over the
/// non-absorbing nodes, with value[u] = boundary[u] at absorbing ones.
/// Requires every non-absorbing recurrent class to be absent (each node must
/// reach the absorbing set with probability 1); solved per strongly
/// connected component so that tree-like chains cost no elimination at all.
std::vector<Rat> expected_to_absorption(
    const std::vector<std::vector<ChainEdge>>& trans,
    const std::vector<bool>& absorbing, const std::vector<Rat>& boundary,
    const std::vector<Rat>& step);

}  // namespace bwcs
