#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwcs/model.hpp"
#include "bwcs/worst_case.hpp"

namespace bwcs {

/// Game restricted by a strategy: P1 nodes keep exactly the chosen edge, P2
/// nodes keep everything, so graph analysis quantifies over all adversaries.
struct ProductGraph {
  struct Node {
    MemoryId mem;
    StateId state;
  };
  struct Arc {
    uint32_t to;
    EdgeId edge;  // underlying game edge
  };
  std::vector<Node> nodes;
  std::vector<std::vector<Arc>> arcs;
  uint32_t initial = 0;

  const GameGraph* game = nullptr;
  Digraph digraph() const;  // weights copied from game edges
};

ProductGraph product(const GameGraph& g, const FiniteMemoryStrategy& s);

/// Exact worst-case certificate. For mean-payoff the value is the minimum
/// cycle mean of the product; the witness is the lasso the adversary uses to
/// attain it. For shortest path the value is the longest play cost to the
/// target when the pre-target product is acyclic, infinite otherwise (the
/// witness is then a lasso avoiding the target).
struct Certificate {
  bool pass = false;
  bool infinite = false;  // shortest path only
  Rat value;              // valid unless infinite
  std::vector<std::string> witness;  // textual play, "state[mem]" steps
};

Certificate verify_worst_case_mp(const GameGraph& g, const FiniteMemoryStrategy& s,
                                 int64_t mu);

Certificate verify_worst_case_sp(const GameGraph& g, const FiniteMemoryStrategy& s,
                                 int64_t mu);

/// Exact expectation of the strategy against the stochastic model:
/// mean payoff, or expected cost to the game's target set (nullopt = the
/// target is missed with positive probability).
std::optional<Rat> exact_expectation(const GameGraph& g, const StochasticModel& m,
                                     const FiniteMemoryStrategy& s);

struct SimParams {
  uint64_t runs = 10000;
  uint64_t horizon = 10000;
  uint64_t seed = 0;
  int jobs = 1;
};

/// Empirical summary over completed runs. Values are integer weight totals:
/// the shortest-path cost of a run, or the horizon-long weight sum for
/// mean-payoff (divide by horizon for the running average). Accumulators
/// are exact, so the summary is reproducible bit for bit for a fixed seed.
struct SimSummary {
  uint64_t runs = 0;
  uint64_t completed = 0;
  uint64_t censored = 0;  // shortest path: horizon hit before target
  uint64_t value_denominator = 1;
  Rat mean;
  Rat variance;
  int64_t min_total = 0;
  int64_t max_total = 0;
  std::vector<uint64_t> histogram;
  int64_t hist_lo = 0, hist_hi = 0;
  std::string rng;
};

SimSummary simulate(const GameGraph& g, const StochasticModel& m,
                    const FiniteMemoryStrategy& s, const SimParams& params);

}  // namespace bwcs
