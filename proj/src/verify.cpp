#include "bwcs/verify.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <thread>

#include "bwcs/expectation.hpp"
#include "bwcs/graph_algo.hpp"

namespace bwcs {

Digraph ProductGraph::digraph() const {
  Digraph d(nodes.size());
  for (uint32_t u = 0; u < nodes.size(); ++u)
    for (const Arc& a : arcs[u])
      d[u].push_back(DigraphEdge{a.to, game->edges[a.edge].weight});
  return d;
}

ProductGraph product(const GameGraph& g, const FiniteMemoryStrategy& s) {
  ProductGraph p;
  p.game = &g;
  std::map<std::pair<MemoryId, StateId>, uint32_t> index;
  auto node_of = [&](MemoryId m, StateId v) {
    auto [it, inserted] = index.try_emplace({m, v}, static_cast<uint32_t>(p.nodes.size()));
    if (inserted) {
      p.nodes.push_back(ProductGraph::Node{m, v});
      p.arcs.emplace_back();
    }
    return it->second;
  };

  p.initial = node_of(s.initial_memory, g.initial);
  std::queue<uint32_t> work;
  work.push(p.initial);
  std::vector<bool> done;
  while (!work.empty()) {
    uint32_t n = work.front();
    work.pop();
    done.resize(p.nodes.size(), false);
    if (done[n]) continue;
    done[n] = true;
    MemoryId m = p.nodes[n].mem;
    StateId v = p.nodes[n].state;

    auto expand = [&](EdgeId e) {
      uint32_t t = node_of(s.update_at(m, e), g.edges[e].dst);
      p.arcs[n].push_back(ProductGraph::Arc{t, e});
      done.resize(p.nodes.size(), false);
      if (!done[t]) work.push(t);
    };
    if (g.states[v].owner == Owner::P1) {
      if (!g.out[v].empty()) expand(s.action_at(m, v));
    } else {
      for (EdgeId e : g.out[v]) expand(e);
    }
    if (p.nodes.size() > 2000000)
      throw ModelError(ModelError::Kind::Overflow, "product too large");
  }
  return p;
}

namespace {

std::string node_name(const ProductGraph& p, uint32_t n) {
  return p.game->states[p.nodes[n].state].name + "[" +
         std::to_string(p.nodes[n].mem) + "]";
}

}  // namespace

Certificate verify_worst_case_mp(const GameGraph& g, const FiniteMemoryStrategy& s,
                                 int64_t mu) {
  ProductGraph p = product(g, s);
  std::optional<CycleMean> cm = min_cycle_mean(p.digraph(), p.initial);
  if (!cm)
    throw ModelError(ModelError::Kind::Internal,
                     "strategy product has no reachable cycle");
  Certificate cert;
  cert.value = cm->mean;
  cert.pass = cm->mean > rat_of_int64(mu);
  for (uint32_t n : cm->path) cert.witness.push_back(node_name(p, n));
  cert.witness.push_back("(cycle)");
  for (uint32_t n : cm->cycle) cert.witness.push_back(node_name(p, n));
  return cert;
}

Certificate verify_worst_case_sp(const GameGraph& g, const FiniteMemoryStrategy& s,
                                 int64_t mu) {
  ProductGraph p = product(g, s);
  const size_t n = p.nodes.size();
  std::vector<bool> stop(n, false);
  for (uint32_t u = 0; u < n; ++u) stop[u] = g.target(p.nodes[u].state);

  // Any cycle before the target makes the worst case infinite.
  auto succ = [&](uint32_t u, const std::function<void(uint32_t)>& cb) {
    if (stop[u]) return;
    for (const ProductGraph::Arc& a : p.arcs[u])
      if (!stop[a.to]) cb(a.to);
  };
  SccResult scc = strongly_connected_components(n, succ);
  Certificate cert;
  for (const auto& comp : scc.members) {
    bool cyc = comp.size() > 1;
    if (!cyc && !stop[comp[0]])
      for (const ProductGraph::Arc& a : p.arcs[comp[0]])
        cyc |= (a.to == comp[0]);
    if (cyc && !stop[comp[0]]) {
      cert.infinite = true;
      cert.pass = false;
      // lasso witness: walk from initial into the component, then around it
      std::vector<uint32_t> parent(n, kNoNode);
      std::queue<uint32_t> bfs;
      bfs.push(p.initial);
      std::vector<bool> seen(n, false);
      seen[p.initial] = true;
      while (!bfs.empty()) {
        uint32_t u = bfs.front();
        bfs.pop();
        for (const ProductGraph::Arc& a : p.arcs[u]) {
          if (!seen[a.to] && !stop[u]) {
            seen[a.to] = true;
            parent[a.to] = u;
            bfs.push(a.to);
          }
        }
      }
      uint32_t entry = comp[0];
      std::vector<uint32_t> path;
      for (uint32_t v = entry; v != kNoNode; v = parent[v]) path.push_back(v);
      std::reverse(path.begin(), path.end());
      for (uint32_t v : path) cert.witness.push_back(node_name(p, v));
      cert.witness.push_back("(cycle avoiding target)");
      return cert;
    }
  }

  // Acyclic before the target: longest-cost play by backward induction over
  // the components in Tarjan (reverse topological) order.
  constexpr int64_t kUnset = std::numeric_limits<int64_t>::min();
  std::vector<int64_t> best(n, kUnset);
  std::vector<uint32_t> via(n, kNoNode);
  for (const auto& comp : scc.members) {
    uint32_t u = comp[0];
    if (stop[u]) {
      best[u] = 0;
      continue;
    }
    for (const ProductGraph::Arc& a : p.arcs[u]) {
      if (best[a.to] == kUnset)
        throw ModelError(ModelError::Kind::Internal,
                         "pre-target region not topologically ordered");
      int64_t cand = g.edges[a.edge].weight + best[a.to];
      if (cand > best[u]) {
        best[u] = cand;
        via[u] = a.to;
      }
    }
  }
  if (best[p.initial] == kUnset)
    throw ModelError(ModelError::Kind::Internal, "initial node has no play");
  cert.value = rat_of_int64(best[p.initial]);
  cert.pass = best[p.initial] < mu;
  for (uint32_t u = p.initial; u != kNoNode; u = via[u]) {
    cert.witness.push_back(node_name(p, u));
    if (stop[u]) break;
  }
  return cert;
}

std::optional<Rat> exact_expectation(const GameGraph& g, const StochasticModel& m,
                                     const FiniteMemoryStrategy& s) {
  MarkovChain mc = apply_strategy(apply_model(g, m), s);
  if (g.measure == Measure::MeanPayoff) return mc_expected_mp(mc);
  return mc_expected_total_cost(mc, g.is_target);
}

// ---------------------------------------------------------------------------
// Seeded simulation. Each run draws from its own splitmix64 stream, so the
// result does not depend on scheduling.

namespace {

struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, bound) by rejection
  uint64_t below(uint64_t bound) {
    uint64_t limit = bound * (UINT64_MAX / bound);
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }
};

struct SampleRow {
  uint64_t denom = 0;
  std::vector<std::pair<uint64_t, EdgeId>> cumulative;  // threshold, edge
};

}  // namespace

SimSummary simulate(const GameGraph& g, const StochasticModel& m,
                    const FiniteMemoryStrategy& s, const SimParams& params) {
  if (params.runs == 0)
    throw ModelError(ModelError::Kind::InvalidQuery, "runs must be >= 1");
  Mdp mdp = apply_model(g, m);

  // Exact integer sampling tables per stochastic state.
  std::vector<SampleRow> rows(g.num_states());
  for (StateId v = 0; v < g.num_states(); ++v) {
    if (!mdp.stochastic(v)) continue;
    Int denom(1);
    for (const auto& [e, p] : mdp.row[v].entries)
      mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), p.get_den().get_mpz_t());
    if (!denom.fits_slong_p())
      throw ModelError(ModelError::Kind::Overflow,
                       "sampling denominator does not fit 64 bits");
    SampleRow row;
    row.denom = static_cast<uint64_t>(denom.get_si());
    uint64_t acc = 0;
    for (const auto& [e, p] : mdp.row[v].entries) {
      if (p <= 0) continue;
      Int t = p.get_num() * (denom / p.get_den());
      acc += static_cast<uint64_t>(t.get_si());
      row.cumulative.push_back({acc, e});
    }
    rows[v] = std::move(row);
  }

  const bool sp = g.measure == Measure::ShortestPath;
  struct RunOut {
    bool censored;
    int64_t total;
  };
  auto one_run = [&](uint64_t run_index) -> RunOut {
    SplitMix64 rng(params.seed ^ (0xd1b54a32d192ed03ULL * (run_index + 1)));
    MemoryId mem = s.initial_memory;
    StateId v = g.initial;
    int64_t total = 0;
    if (sp && g.target(v)) return {false, 0};
    for (uint64_t step = 0; step < params.horizon; ++step) {
      EdgeId e;
      if (mdp.stochastic(v)) {
        uint64_t r = rng.below(rows[v].denom);
        e = rows[v].cumulative.back().second;
        for (const auto& [threshold, edge] : rows[v].cumulative) {
          if (r < threshold) {
            e = edge;
            break;
          }
        }
      } else if (g.out[v].empty()) {
        break;  // absorbing target sink
      } else {
        e = s.action_at(mem, v);
      }
      total += g.edges[e].weight;
      mem = s.update_at(mem, e);
      v = g.edges[e].dst;
      if (sp && g.target(v)) return {false, total};
    }
    return {sp, total};
  };

  const uint64_t runs = params.runs;
  std::vector<RunOut> outs(runs);
  int jobs = std::max(1, params.jobs);
  if (jobs == 1) {
    for (uint64_t i = 0; i < runs; ++i) outs[i] = one_run(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<uint64_t> cursor{0};
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (uint64_t i; (i = cursor.fetch_add(64)) < runs;)
          for (uint64_t r = i; r < std::min(i + 64, runs); ++r) outs[r] = one_run(r);
      });
    for (auto& t : pool) t.join();
  }

  SimSummary sum;
  sum.runs = runs;
  sum.rng = "splitmix64";
  sum.value_denominator = sp ? 1 : params.horizon;
  Int acc(0), acc2(0);
  bool first = true;
  for (const RunOut& r : outs) {
    if (r.censored) {
      ++sum.censored;
      continue;
    }
    ++sum.completed;
    Int t(static_cast<long>(r.total));
    acc += t;
    acc2 += t * t;
    if (first || r.total < sum.min_total) sum.min_total = r.total;
    if (first || r.total > sum.max_total) sum.max_total = r.total;
    first = false;
  }
  if (sum.completed > 0) {
    Int n(static_cast<long>(sum.completed));
    Int den(static_cast<long>(sum.value_denominator));
    sum.mean = Rat(acc, n * den);
    sum.mean.canonicalize();
    // population variance of the per-run values
    Rat ex2(acc2, n * den * den);
    ex2.canonicalize();
    sum.variance = ex2 - sum.mean * sum.mean;

    const int buckets = 16;
    sum.hist_lo = sum.min_total;
    sum.hist_hi = sum.max_total;
    sum.histogram.assign(buckets, 0);
    int64_t span = sum.max_total - sum.min_total + 1;
    for (const RunOut& r : outs) {
      if (r.censored) continue;
      int64_t b = (r.total - sum.min_total) * buckets / span;
      ++sum.histogram[static_cast<size_t>(b)];
    }
  }
  return sum;
}

}  // namespace bwcs
