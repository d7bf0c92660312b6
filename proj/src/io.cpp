#include "bwcs/io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace bwcs {

namespace {

struct Token {
  std::string text;
  SourceSpan span;
};

// Whitespace-separated tokens; ':' and ',' split off as their own tokens,
// "->" kept whole.
std::vector<Token> lex_line(const std::string& line, int lineno) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    size_t begin = i;
    if (line[i] == ':' || line[i] == ',') {
      ++i;
    } else {
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
             line[i] != ':' && line[i] != ',' && line[i] != '#')
        ++i;
    }
    out.push_back(Token{line.substr(begin, i - begin),
                        SourceSpan{lineno, static_cast<int>(begin + 1),
                                   static_cast<int>(i)}});
  }
  return out;
}

std::vector<std::vector<Token>> lex(const std::string& text) {
  std::vector<std::vector<Token>> lines;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto toks = lex_line(line, no);
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  return lines;
}

[[noreturn]] void fail(const Token& t, const std::string& msg) {
  throw ParseError(t.span, msg + " (got '" + t.text + "')");
}

[[noreturn]] void fail_line(int line, const std::string& msg) {
  throw ParseError(SourceSpan{line, 1, 1}, msg);
}

int64_t parse_int(const Token& t) {
  try {
    size_t pos = 0;
    int64_t v = std::stoll(t.text, &pos);
    if (pos != t.text.size()) fail(t, "expected integer");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (...) {
    fail(t, "expected integer");
  }
}

Rat parse_prob(const Token& t) {
  auto slash = t.text.find('/');
  if (slash == std::string::npos) fail(t, "expected probability num/den");
  auto r = parse_rational(t.text);
  if (!r) fail(t, "expected probability num/den");
  return *r;
}

const Token& need(const std::vector<Token>& toks, size_t i, const std::string& what) {
  if (i >= toks.size()) {
    SourceSpan sp = toks.empty() ? SourceSpan{1, 1, 1} : toks.back().span;
    throw ParseError(sp, "expected " + what);
  }
  return toks[i];
}

StateId lookup_state(const GameGraph& g, const Token& t) {
  for (StateId s = 0; s < g.num_states(); ++s)
    if (g.states[s].name == t.text) return s;
  throw ParseError(t.span, "unknown state '" + t.text + "'");
}

EdgeId lookup_out_edge(const GameGraph& g, StateId src, const Token& t) {
  EdgeId e = g.resolve_out_edge(src, t.text);
  if (e == kNoEdge)
    throw ParseError(t.span, "no unique edge '" + t.text + "' out of " +
                                 g.states[src].name);
  return e;
}

std::string edge_ref(const GameGraph& g, EdgeId e) {
  if (!g.edges[e].label.empty()) return g.edges[e].label;
  return g.states[g.edges[e].dst].name;
}

// row body: <ref> <num>/<den> [, <ref> <num>/<den>]...
Distribution parse_row_body(const GameGraph& g, StateId src,
                            const std::vector<Token>& toks, size_t i) {
  Distribution d;
  while (true) {
    const Token& ref = need(toks, i, "edge reference");
    EdgeId e = lookup_out_edge(g, src, ref);
    const Token& pr = need(toks, i + 1, "probability");
    d.entries.emplace_back(e, parse_prob(pr));
    i += 2;
    if (i >= toks.size()) break;
    if (toks[i].text != ",") fail(toks[i], "expected ','");
    ++i;
  }
  Rat sum = d.total();
  if (sum != 1)
    throw ModelError(ModelError::Kind::ProbabilityNotOne,
                     "row of " + g.states[src].name + " sums to " +
                         to_fraction_string(sum) + ", not 1");
  std::sort(d.entries.begin(), d.entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return d;
}

void check_row_coverage(const GameGraph& g,
                        const std::map<StateId, Distribution>& rows,
                        const std::string& ctx) {
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.states[s].owner != Owner::P2 || g.out[s].size() <= 1) continue;
    if (!rows.count(s))
      throw ModelError(ModelError::Kind::MissingRow,
                       ctx + "no row for P2 state " + g.states[s].name);
  }
}

}  // namespace

GameGraph parse_game(const std::string& text) {
  auto lines = lex(text);
  if (lines.empty()) fail_line(1, "empty game file");

  const auto& head = lines[0];
  if (head[0].text != "game") fail(head[0], "expected 'game'");
  const Token& mt = need(head, 1, "measure");
  Measure measure;
  if (mt.text == "mean-payoff")
    measure = Measure::MeanPayoff;
  else if (mt.text == "shortest-path")
    measure = Measure::ShortestPath;
  else
    fail(mt, "expected mean-payoff or shortest-path");

  GameGraph g;
  g.measure = measure;
  bool init_seen = false;
  std::map<std::pair<StateId, StateId>, std::vector<std::string>> parallel;

  for (size_t li = 1; li < lines.size(); ++li) {
    const auto& toks = lines[li];
    const std::string& kw = toks[0].text;
    if (kw == "state") {
      const Token& name = need(toks, 1, "state name");
      for (const State& s : g.states)
        if (s.name == name.text)
          throw ModelError(ModelError::Kind::DuplicateState,
                           "duplicate state " + name.text);
      const Token& owner = need(toks, 2, "owner p1|p2");
      if (owner.text != "p1" && owner.text != "p2") fail(owner, "expected p1 or p2");
      g.add_state(name.text, owner.text == "p1" ? Owner::P1 : Owner::P2);
    } else if (kw == "edge") {
      StateId src = lookup_state(g, need(toks, 1, "source state"));
      StateId dst = lookup_state(g, need(toks, 2, "target state"));
      int64_t w = parse_int(need(toks, 3, "weight"));
      std::string label;
      if (toks.size() > 4) {
        if (toks[4].text != "label" || toks.size() != 6)
          fail(toks[4], "expected 'label <word>'");
        label = toks[5].text;
      }
      auto& labels = parallel[{src, dst}];
      for (const std::string& other : labels)
        if (other == label)
          fail(toks[1], label.empty() ? "parallel edges need distinct labels"
                                      : "duplicate label on parallel edge");
      labels.push_back(label);
      g.add_edge(src, dst, w, label);
    } else if (kw == "init") {
      if (init_seen) fail(toks[0], "duplicate init");
      g.initial = lookup_state(g, need(toks, 1, "state name"));
      init_seen = true;
    } else if (kw == "target") {
      if (measure != Measure::ShortestPath)
        fail(toks[0], "target only allowed in shortest-path games");
      g.set_target(lookup_state(g, need(toks, 1, "state name")));
    } else {
      fail(toks[0], "expected state/edge/init/target");
    }
  }
  if (!init_seen) g.initial = 0;
  return validate_game(std::move(g), measure);
}

ParsedModel parse_model(const std::string& text, const GameGraph& g) {
  auto lines = lex(text);
  if (lines.empty()) fail_line(1, "empty model file");
  const auto& head = lines[0];
  if (head[0].text != "model") fail(head[0], "expected 'model'");
  const Token& kind = need(head, 1, "memoryless|mealy");

  ParsedModel out;
  if (kind.text == "memoryless") {
    StochasticModel m;
    for (size_t li = 1; li < lines.size(); ++li) {
      const auto& toks = lines[li];
      if (toks[0].text != "row") fail(toks[0], "expected 'row'");
      StateId s = lookup_state(g, need(toks, 1, "P2 state"));
      if (g.states[s].owner != Owner::P2)
        fail(toks[1], "row state must belong to P2");
      if (need(toks, 2, "':'").text != ":") fail(toks[2], "expected ':'");
      if (m.rows.count(s)) fail(toks[1], "duplicate row");
      m.rows[s] = parse_row_body(g, s, toks, 3);
    }
    check_row_coverage(g, m.rows, "");
    out.memoryless = std::move(m);
    return out;
  }

  if (kind.text != "mealy") fail(kind, "expected memoryless or mealy");
  int64_t k = parse_int(need(head, 2, "memory count"));
  if (k <= 0) fail(head[2], "memory count must be positive");

  FiniteMemoryModel fm;
  std::map<std::string, MemoryId> mem_ids;
  bool init_seen = false;
  auto mem_of = [&](const Token& t) {
    auto it = mem_ids.find(t.text);
    if (it == mem_ids.end()) fail(t, "unknown memory id");
    return it->second;
  };

  for (size_t li = 1; li < lines.size(); ++li) {
    const auto& toks = lines[li];
    const std::string& kw = toks[0].text;
    if (kw == "mem") {
      const Token& name = need(toks, 1, "memory id");
      if (mem_ids.count(name.text)) fail(name, "duplicate memory id");
      MemoryId id = static_cast<MemoryId>(fm.memory_names.size());
      mem_ids[name.text] = id;
      fm.memory_names.push_back(name.text);
      fm.update.emplace_back(g.num_states(), id);
      fm.rows.emplace_back();
      if (toks.size() > 2) {
        if (toks[2].text != "init") fail(toks[2], "expected 'init'");
        if (init_seen) fail(toks[2], "duplicate init memory");
        fm.initial_memory = id;
        init_seen = true;
      }
    } else if (kw == "update") {
      MemoryId m = mem_of(need(toks, 1, "memory id"));
      StateId s = lookup_state(g, need(toks, 2, "state"));
      if (need(toks, 3, "'->'").text != "->") fail(toks[3], "expected '->'");
      MemoryId m2 = mem_of(need(toks, 4, "memory id"));
      fm.update[m][s] = m2;
    } else if (kw == "row") {
      MemoryId m = mem_of(need(toks, 1, "memory id"));
      StateId s = lookup_state(g, need(toks, 2, "P2 state"));
      if (g.states[s].owner != Owner::P2)
        fail(toks[2], "row state must belong to P2");
      if (need(toks, 3, "':'").text != ":") fail(toks[3], "expected ':'");
      if (fm.rows[m].count(s)) fail(toks[2], "duplicate row");
      fm.rows[m][s] = parse_row_body(g, s, toks, 4);
    } else {
      fail(toks[0], "expected mem/update/row");
    }
  }
  if (static_cast<int64_t>(fm.memory_names.size()) != k)
    fail_line(1, "declared memory count does not match mem lines");
  for (MemoryId m = 0; m < fm.memory_size(); ++m)
    check_row_coverage(g, fm.rows[m], "memory " + fm.memory_names[m] + ": ");
  out.mealy = std::move(fm);
  return out;
}

StochasticModel parse_memoryless_model(const std::string& text,
                                       const GameGraph& g) {
  ParsedModel pm = parse_model(text, g);
  if (!pm.memoryless)
    throw ModelError(ModelError::Kind::InvalidQuery, "expected a memoryless model");
  return *pm.memoryless;
}

FiniteMemoryStrategy parse_strategy(const std::string& text, const GameGraph& g) {
  auto lines = lex(text);
  if (lines.empty()) fail_line(1, "empty strategy file");
  const auto& head = lines[0];
  if (head[0].text != "strategy") fail(head[0], "expected 'strategy'");
  int64_t k = parse_int(need(head, 1, "memory count"));
  if (k <= 0) fail(head[1], "memory count must be positive");

  FiniteMemoryStrategy s;
  std::map<std::string, MemoryId> mem_ids;
  bool init_seen = false;
  auto mem_of = [&](const Token& t) {
    auto it = mem_ids.find(t.text);
    if (it == mem_ids.end()) fail(t, "unknown memory id");
    return it->second;
  };

  for (size_t li = 1; li < lines.size(); ++li) {
    const auto& toks = lines[li];
    const std::string& kw = toks[0].text;
    if (kw == "mem") {
      const Token& name = need(toks, 1, "memory id");
      if (mem_ids.count(name.text)) fail(name, "duplicate memory id");
      mem_ids[name.text] = s.add_memory(name.text, g.num_states(), g.edges.size());
      if (toks.size() > 2) {
        if (toks[2].text != "init") fail(toks[2], "expected 'init'");
        if (init_seen) fail(toks[2], "duplicate init memory");
        s.initial_memory = mem_ids[name.text];
        init_seen = true;
      }
    } else if (kw == "act") {
      MemoryId m = mem_of(need(toks, 1, "memory id"));
      StateId st = lookup_state(g, need(toks, 2, "P1 state"));
      if (g.states[st].owner != Owner::P1)
        fail(toks[2], "actions only apply to P1 states");
      if (need(toks, 3, "'->'").text != "->") fail(toks[3], "expected '->'");
      EdgeId e = lookup_out_edge(g, st, need(toks, 4, "edge reference"));
      if (s.action[m][st] != kNoEdge) fail(toks[2], "duplicate action");
      s.action[m][st] = e;
    } else if (kw == "update") {
      MemoryId m = mem_of(need(toks, 1, "memory id"));
      StateId st = lookup_state(g, need(toks, 2, "state"));
      EdgeId e = lookup_out_edge(g, st, need(toks, 3, "edge reference"));
      if (need(toks, 4, "'->'").text != "->") fail(toks[4], "expected '->'");
      MemoryId m2 = mem_of(need(toks, 5, "memory id"));
      s.update[m][e] = m2;
    } else {
      fail(toks[0], "expected mem/act/update");
    }
  }
  if (static_cast<int64_t>(s.memory_size()) != k)
    fail_line(1, "declared memory count does not match mem lines");
  return s;
}

std::string serialize_game(const GameGraph& g) {
  std::ostringstream out;
  out << "game "
      << (g.measure == Measure::MeanPayoff ? "mean-payoff" : "shortest-path")
      << "\n";
  for (const State& s : g.states)
    out << "state " << s.name << (s.owner == Owner::P1 ? " p1" : " p2") << "\n";
  for (const Edge& e : g.edges) {
    out << "edge " << g.states[e.src].name << " " << g.states[e.dst].name << " "
        << e.weight;
    if (!e.label.empty()) out << " label " << e.label;
    out << "\n";
  }
  out << "init " << g.states[g.initial].name << "\n";
  for (StateId s = 0; s < g.num_states(); ++s)
    if (g.target(s)) out << "target " << g.states[s].name << "\n";
  return out.str();
}

std::string serialize_model(const StochasticModel& m, const GameGraph& g) {
  std::ostringstream out;
  out << "model memoryless\n";
  for (const auto& [s, row] : m.rows) {
    out << "row " << g.states[s].name << ":";
    bool first = true;
    for (const auto& [e, p] : row.entries) {
      out << (first ? " " : ", ") << edge_ref(g, e) << " " << p.get_num().get_str()
          << "/" << p.get_den().get_str();
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

std::string serialize_strategy(const FiniteMemoryStrategy& s, const GameGraph& g) {
  std::ostringstream out;
  out << "strategy " << s.memory_size() << "\n";
  for (MemoryId m = 0; m < s.memory_size(); ++m) {
    out << "mem " << s.memory_names[m];
    if (m == s.initial_memory) out << " init";
    out << "\n";
  }
  for (MemoryId m = 0; m < s.memory_size(); ++m)
    for (StateId st = 0; st < g.num_states(); ++st)
      if (st < s.action[m].size() && s.action[m][st] != kNoEdge)
        out << "act " << s.memory_names[m] << " " << g.states[st].name << " -> "
            << edge_ref(g, s.action[m][st]) << "\n";
  for (MemoryId m = 0; m < s.memory_size(); ++m)
    for (EdgeId e = 0; e < g.edges.size(); ++e)
      if (s.update[m][e] != m)
        out << "update " << s.memory_names[m] << " "
            << g.states[g.edges[e].src].name << " " << edge_ref(g, e) << " -> "
            << s.memory_names[s.update[m][e]] << "\n";
  return out.str();
}

}  // namespace bwcs
