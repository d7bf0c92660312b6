#pragma once

#include <utility>
#include <vector>

#include "bwcs/model.hpp"

namespace bwcs {

/// MDP view for terminal-reward optimization. Decision nodes pick one
/// successor, stochastic nodes follow a fixed distribution, terminal nodes
/// carry the reward collected when the play settles there.
struct ReachOptProblem {
  enum class Kind : uint8_t { Decision, Stochastic, Terminal };
  struct Node {
    Kind kind = Kind::Decision;
    std::vector<uint32_t> succs;                 // Decision
    std::vector<std::pair<uint32_t, Rat>> dist;  // Stochastic
    Rat reward;                                  // Terminal
  };
  std::vector<Node> nodes;
};

/// Nodes from which the controller can reach a terminal with probability 1.
std::vector<bool> almost_sure_reach_region(const ReachOptProblem& p);

struct ReachOptResult {
  std::vector<bool> region;
  std::vector<Rat> value;        // valid on region
  std::vector<uint32_t> choice;  // per decision node in region: succ index
  // End components of the region (excluding terminals). Nodes outside any
  // component have mec_id kNoNode. For a component whose nodes are routed,
  // mec_exit names the member and succ index the policy leaves through.
  std::vector<uint32_t> mec_id;
  std::vector<std::pair<uint32_t, uint32_t>> mec_exit;
};

/// Maximal expected terminal reward among strategies that reach terminals
/// with probability 1. End components inside the region are collapsed, the
/// quotient is solved by exact policy iteration, and the returned choices
/// route every component toward its chosen exit. Ties break toward the
/// lowest successor index.
ReachOptResult maximize_terminal_reward(const ReachOptProblem& p);

}  // namespace bwcs
