#include <algorithm>
#include <functional>
#include <set>

#include "schemnet/netlist.hpp"

namespace schemnet {

namespace {

struct ECard {
  int type;
  std::vector<int> nodes;
  bool unordered;
  std::optional<double> value;
  std::string model;
  std::string designator;
};

struct Graph {
  std::vector<std::string> names;
  std::map<std::string, int> index;
  std::vector<ECard> cards;
  std::vector<std::vector<int>> incident;  // node -> card indices (distinct)
  std::vector<std::vector<std::pair<int, int>>> signature;
  int ground = -1;
};

Graph build_graph(const Netlist& n, const EquivalenceOptions& opts) {
  const bool values = opts.compare_values;
  Graph g;
  for (const auto& c : n.cards) {
    ECard e{static_cast<int>(c.ctype), {}, is_unpolarized(c.ctype), std::nullopt, "", ""};
    if (opts.compare_designators) e.designator = c.designator;
    if (values) {
      if (c.value) e.value = c.value->base();
      if (c.model) e.model = *c.model;
    }
    for (const auto& name : c.nodes) {
      auto [it, fresh] = g.index.emplace(name, static_cast<int>(g.names.size()));
      if (fresh) g.names.push_back(name);
      e.nodes.push_back(it->second);
    }
    g.cards.push_back(std::move(e));
  }
  if (g.names.size() > static_cast<std::size_t>(kMaxNodes))
    throw CapacityError("netlist has " + std::to_string(g.names.size()) + " nodes; limit is " + std::to_string(kMaxNodes));
  if (auto it = g.index.find("0"); it != g.index.end()) g.ground = it->second;
  g.incident.assign(g.names.size(), {});
  g.signature.assign(g.names.size(), {});
  for (std::size_t ci = 0; ci < g.cards.size(); ++ci) {
    const auto& c = g.cards[ci];
    for (std::size_t k = 0; k < c.nodes.size(); ++k) {
      int v = c.nodes[k];
      if (g.incident[v].empty() || g.incident[v].back() != static_cast<int>(ci)) g.incident[v].push_back(static_cast<int>(ci));
      g.signature[v].push_back({c.type, c.unordered ? 0 : static_cast<int>(k) + 1});
    }
  }
  for (auto& s : g.signature) std::sort(s.begin(), s.end());
  return g;
}

bool payload_match(const ECard& a, const ECard& b) {
  if (a.type != b.type || a.model != b.model || a.designator != b.designator) return false;
  if (a.value.has_value() != b.value.has_value()) return false;
  return !a.value || values_close(*a.value, *b.value);
}

bool nodes_match(const ECard& a, const ECard& b, const std::vector<int>& map) {
  if (a.nodes.size() != b.nodes.size()) return false;
  if (a.unordered && a.nodes.size() == 2) {
    int x = map[a.nodes[0]], y = map[a.nodes[1]];
    return (x == b.nodes[0] && y == b.nodes[1]) || (x == b.nodes[1] && y == b.nodes[0]);
  }
  for (std::size_t k = 0; k < a.nodes.size(); ++k)
    if (map[a.nodes[k]] != b.nodes[k]) return false;
  return true;
}

// Search order: ground first, then the node most tied to already ordered nodes.
std::vector<int> search_order(const Graph& a, const std::vector<int>& cand_count) {
  const int n = static_cast<int>(a.names.size());
  std::vector<int> order;
  std::vector<char> placed(n, 0);
  if (a.ground >= 0) {
    order.push_back(a.ground);
    placed[a.ground] = 1;
  }
  std::vector<int> ties(n, 0);
  auto bump = [&](int v) {
    for (int ci : a.incident[v])
      for (int u : a.cards[ci].nodes)
        if (!placed[u]) ++ties[u];
  };
  if (a.ground >= 0) bump(a.ground);
  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (placed[v]) continue;
      if (best < 0 || ties[v] > ties[best] || (ties[v] == ties[best] && cand_count[v] < cand_count[best]))
        best = v;
    }
    placed[best] = 1;
    order.push_back(best);
    bump(best);
  }
  return order;
}

// completes[pos] = cards whose last node in `order` sits at position pos.
std::vector<std::vector<int>> completion_lists(const Graph& a, const std::vector<int>& order) {
  std::vector<int> pos(a.names.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> out(order.size());
  for (std::size_t ci = 0; ci < a.cards.size(); ++ci) {
    int last = 0;
    for (int v : a.cards[ci].nodes) last = std::max(last, pos[v]);
    out[last].push_back(static_cast<int>(ci));
  }
  return out;
}

std::map<std::string, std::string> name_mapping(const Graph& a, const Graph& b, const std::vector<int>& map) {
  std::map<std::string, std::string> out;
  for (std::size_t v = 0; v < map.size(); ++v)
    if (map[v] >= 0) out[a.names[v]] = b.names[map[v]];
  return out;
}

}  // namespace

EquivalenceResult netlists_equivalent(const Netlist& na, const Netlist& nb, const EquivalenceOptions& opts) {
  Graph a = build_graph(na, opts);
  Graph b = build_graph(nb, opts);
  EquivalenceResult res;
  auto fail = [&](std::string why) {
    res.mismatch_reason = std::move(why);
    return res;
  };
  if (a.cards.size() != b.cards.size()) return fail("card counts differ");
  if (a.names.size() != b.names.size()) return fail("node counts differ");
  if ((a.ground >= 0) != (b.ground >= 0)) return fail("ground node present in only one netlist");
  {
    auto sigs = [](const Graph& g) {
      auto s = g.signature;
      std::sort(s.begin(), s.end());
      return s;
    };
    if (sigs(a) != sigs(b)) return fail("node signatures differ");
  }

  const int n = static_cast<int>(a.names.size());
  std::vector<std::vector<int>> cand(n);
  std::vector<int> cand_count(n);
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u)
      if (a.signature[v] == b.signature[u] && ((v == a.ground) == (u == b.ground))) cand[v].push_back(u);
    cand_count[v] = static_cast<int>(cand[v].size());
    if (cand[v].empty()) return fail("node " + a.names[v] + " has no counterpart");
  }
  std::vector<int> order = search_order(a, cand_count);
  auto completes = completion_lists(a, order);

  std::vector<int> map(n, -1);
  std::vector<char> used_b(n, 0);
  std::vector<char> consumed(b.cards.size(), 0);

  std::function<bool(int)> search = [&](int pos) -> bool {
    if (pos == n) return true;
    int v = order[pos];
    for (int u : cand[v]) {
      if (used_b[u]) continue;
      map[v] = u;
      used_b[u] = 1;
      std::vector<int> took;
      bool ok = true;
      for (int ci : completes[pos]) {
        int hit = -1;
        for (std::size_t bj = 0; bj < b.cards.size(); ++bj)
          if (!consumed[bj] && payload_match(a.cards[ci], b.cards[bj]) && nodes_match(a.cards[ci], b.cards[bj], map)) {
            hit = static_cast<int>(bj);
            break;
          }
        if (hit < 0) {
          ok = false;
          break;
        }
        consumed[hit] = 1;
        took.push_back(hit);
      }
      if (ok && search(pos + 1)) return true;
      for (int t : took) consumed[t] = 0;
      map[v] = -1;
      used_b[u] = 0;
    }
    return false;
  };

  if (!search(0)) return fail("no node mapping reproduces every card");
  res.equivalent = true;
  res.node_mapping = name_mapping(a, b, map);
  return res;
}

CommonSubset max_common_cards(const Netlist& na, const Netlist& nb, const EquivalenceOptions& opts, long step_cap) {
  Graph a = build_graph(na, opts);
  Graph b = build_graph(nb, opts);
  CommonSubset res;
  if (a.cards.empty() || b.cards.empty()) return res;
  if (netlists_equivalent(na, nb, opts).equivalent) {
    res.matched = static_cast<int>(a.cards.size());
    return res;
  }

  const int n = static_cast<int>(a.names.size());
  const int m = static_cast<int>(b.names.size());
  std::vector<std::vector<int>> cand(n);
  std::vector<int> cand_count(n);
  for (int v = 0; v < n; ++v) {
    if (v == a.ground) {
      if (b.ground >= 0) cand[v].push_back(b.ground);
    } else {
      std::vector<int> same, other;
      for (int u = 0; u < m; ++u) {
        if (u == b.ground) continue;
        (a.signature[v] == b.signature[u] ? same : other).push_back(u);
      }
      cand[v] = same;
      cand[v].insert(cand[v].end(), other.begin(), other.end());
    }
    cand[v].push_back(-1);
    cand_count[v] = static_cast<int>(cand[v].size());
  }
  std::vector<int> order = search_order(a, cand_count);
  auto completes = completion_lists(a, order);

  int types = 0;
  for (const auto& c : a.cards) types = std::max(types, c.type + 1);
  for (const auto& c : b.cards) types = std::max(types, c.type + 1);
  std::vector<int> pending_a(types, 0), free_b(types, 0);
  for (const auto& c : a.cards) ++pending_a[c.type];
  for (const auto& c : b.cards) ++free_b[c.type];
  std::vector<char> dead(a.cards.size(), 0);

  std::vector<int> map(n, -1);
  std::vector<char> used_b(m, 0);
  std::vector<char> consumed(b.cards.size(), 0);
  int best = 0;
  long steps = 0;

  auto bound = [&](int matched) {
    int ub = matched;
    for (int t = 0; t < types; ++t) ub += std::min(pending_a[t], free_b[t]);
    return ub;
  };

  std::function<void(int, int)> search = [&](int pos, int matched) {
    best = std::max(best, matched);
    if (pos == n || ++steps > step_cap) {
      if (steps > step_cap) res.exact = false;
      return;
    }
    if (bound(matched) <= best) return;
    int v = order[pos];
    for (int u : cand[v]) {
      if (steps > step_cap) return;
      if (u >= 0 && used_b[u]) continue;
      map[v] = u;
      if (u >= 0) used_b[u] = 1;
      std::vector<int> killed, took, finished;
      if (u < 0)
        for (int ci : a.incident[v])
          if (!dead[ci]) {
            dead[ci] = 1;
            killed.push_back(ci);
            --pending_a[a.cards[ci].type];
          }
      int gained = 0;
      for (int ci : completes[pos]) {
        if (dead[ci]) continue;
        finished.push_back(ci);
        --pending_a[a.cards[ci].type];
        for (std::size_t bj = 0; bj < b.cards.size(); ++bj)
          if (!consumed[bj] && payload_match(a.cards[ci], b.cards[bj]) && nodes_match(a.cards[ci], b.cards[bj], map)) {
            consumed[bj] = 1;
            --free_b[b.cards[bj].type];
            took.push_back(static_cast<int>(bj));
            ++gained;
            break;
          }
      }
      search(pos + 1, matched + gained);
      for (int t : took) {
        consumed[t] = 0;
        ++free_b[b.cards[t].type];
      }
      for (int ci : finished) ++pending_a[a.cards[ci].type];
      for (int ci : killed) {
        dead[ci] = 0;
        ++pending_a[a.cards[ci].type];
      }
      if (u >= 0) used_b[u] = 0;
      map[v] = -1;
    }
  };
  search(0, 0);
  res.matched = best;
  return res;
}

}  // namespace schemnet
