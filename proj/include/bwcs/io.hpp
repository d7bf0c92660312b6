#pragma once

#include <optional>
#include <string>

#include "bwcs/model.hpp"

namespace bwcs {

/// Line-based text formats; '#' starts a comment, one declaration per line.
///
/// Game:      game <mean-payoff|shortest-path>
///            state <name> <p1|p2>
///            edge <src> <dst> <int-weight> [label <word>]
///            init <name>            (optional; defaults to first state)
///            target <name>          (shortest-path only, repeatable)
/// Model:     model memoryless
///            row <p2-state>: <dst-or-label> <num>/<den>, ...
///        or  model mealy <k>
///            mem <id> [init]
///            update <mem> <state> -> <mem>
///            row <mem> <p2-state>: <dst-or-label> <num>/<den>, ...
/// Strategy:  strategy <k>
///            mem <id> [init]
///            act <mem> <p1-state> -> <dst-or-label>
///            update <mem> <state> <dst-or-label> -> <mem>
///
/// Parallel edges must carry distinct labels so rows and strategies can
/// reference them unambiguously.
GameGraph parse_game(const std::string& text);

struct ParsedModel {
  std::optional<StochasticModel> memoryless;
  std::optional<FiniteMemoryModel> mealy;
};

ParsedModel parse_model(const std::string& text, const GameGraph& g);

/// Convenience: memoryless model, or the composed product reduced to one.
/// Mealy models change the game; callers needing that must use parse_model.
StochasticModel parse_memoryless_model(const std::string& text, const GameGraph& g);

FiniteMemoryStrategy parse_strategy(const std::string& text, const GameGraph& g);

std::string serialize_game(const GameGraph& g);
std::string serialize_model(const StochasticModel& m, const GameGraph& g);
std::string serialize_strategy(const FiniteMemoryStrategy& s, const GameGraph& g);

}  // namespace bwcs
