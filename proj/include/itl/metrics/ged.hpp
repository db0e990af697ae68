#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "itl/floorplan/graph.hpp"

namespace itl {

/// Node-labelled graph with labelled edges (0 = no edge).
struct LabeledGraph {
  std::vector<int> labels;
  std::vector<std::vector<int>> edge;

  explicit LabeledGraph(std::size_t n = 0) : labels(n, 0), edge(n, std::vector<int>(n, 0)) {}
  std::size_t n() const { return labels.size(); }
  void connect(std::size_t i, std::size_t j, int label = 1) { edge[i][j] = edge[j][i] = label; }
};

/// Thresholded multi-relational graph: edge label 1 = door, 2 = wall,
/// 3 = spatial without a type. Node labels index `node_types` by name.
inline LabeledGraph labeled_graph(const MultiAdjacency& a, const std::vector<std::string>& node_types, double threshold = 0.5) {
  LabeledGraph g(a.n);
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < a.n && i < node_types.size(); ++i) {
    auto it = ids.emplace(node_types[i], static_cast<int>(ids.size()) + 1).first;
    g.labels[i] = it->second;
  }
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = i + 1; j < a.n; ++j) {
      const int l = a.door(i, j) >= threshold ? 1 : a.wall(i, j) >= threshold ? 2 : a.spatial(i, j) >= threshold ? 3 : 0;
      g.connect(i, j, l);
    }
  return g;
}

/// Node labels must be comparable across graphs; this variant assigns label
/// ids from a shared vocabulary instead.
inline LabeledGraph labeled_graph(const MultiAdjacency& a, const std::vector<int>& node_labels, double threshold = 0.5) {
  LabeledGraph g(a.n);
  for (std::size_t i = 0; i < a.n && i < node_labels.size(); ++i) g.labels[i] = node_labels[i];
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = i + 1; j < a.n; ++j)
      g.connect(i, j, a.door(i, j) >= threshold ? 1 : a.wall(i, j) >= threshold ? 2 : a.spatial(i, j) >= threshold ? 3 : 0);
  return g;
}

struct GedResult {
  int cost = 0;
  bool exact = true;
};

inline constexpr std::size_t kExactGedMaxNodes = 12;

namespace ged_detail {

inline constexpr int kDeleted = -1;

/// Cost added when g1 node `u` (the next one in order) is mapped to `v`
/// (or deleted), given the mapping of nodes 0..u-1.
inline int step_cost(const LabeledGraph& g1, const LabeledGraph& g2, const std::vector<int>& map, std::size_t u, int v) {
  int c = 0;
  if (v == kDeleted) {
    c += 1;
    for (std::size_t w = 0; w < u; ++w) c += g1.edge[u][w] != 0 ? 1 : 0;
    return c;
  }
  c += g1.labels[u] != g2.labels[static_cast<std::size_t>(v)] ? 1 : 0;
  for (std::size_t w = 0; w < u; ++w) {
    if (map[w] == kDeleted) {
      c += g1.edge[u][w] != 0 ? 1 : 0;
      continue;
    }
    const int e2 = g2.edge[static_cast<std::size_t>(v)][static_cast<std::size_t>(map[w])];
    c += g1.edge[u][w] != e2 ? 1 : 0;
  }
  return c;
}

/// Cost of inserting every g2 node the mapping left unused, with its edges
/// to all other g2 nodes that were not matched by g1 pairs.
inline int completion_cost(const LabeledGraph& g2, const std::vector<bool>& used) {
  int c = 0;
  const std::size_t n2 = g2.n();
  for (std::size_t v = 0; v < n2; ++v) {
    if (used[v]) continue;
    c += 1;
    for (std::size_t w = 0; w < n2; ++w)
      if (w != v && g2.edge[v][w] != 0 && (used[w] || w > v)) c += 1;
  }
  return c;
}

/// Admissible estimate of the remaining cost: label-multiset bound on nodes
/// plus the analogous bound on edges touching unprocessed nodes.
inline int heuristic(const LabeledGraph& g1, const LabeledGraph& g2, std::size_t next, const std::vector<bool>& used) {
  std::map<int, int> l1, l2, e1, e2;
  int n1 = 0, n2 = 0, m1 = 0, m2 = 0;
  for (std::size_t u = next; u < g1.n(); ++u) {
    ++l1[g1.labels[u]];
    ++n1;
    for (std::size_t w = 0; w < g1.n(); ++w)
      if (g1.edge[u][w] != 0 && (w < next || w > u)) {
        ++e1[g1.edge[u][w]];
        ++m1;
      }
  }
  for (std::size_t v = 0; v < g2.n(); ++v) {
    if (used[v]) continue;
    ++l2[g2.labels[v]];
    ++n2;
    for (std::size_t w = 0; w < g2.n(); ++w)
      if (g2.edge[v][w] != 0 && (used[w] || w > v)) {
        ++e2[g2.edge[v][w]];
        ++m2;
      }
  }
  auto common = [](const std::map<int, int>& a, const std::map<int, int>& b) {
    int c = 0;
    for (const auto& [k, v] : a)
      if (auto it = b.find(k); it != b.end()) c += std::min(v, it->second);
    return c;
  };
  return std::max(n1, n2) - common(l1, l2) + std::max(m1, m2) - common(e1, e2);
}

inline GedResult greedy(const LabeledGraph& g1, const LabeledGraph& g2) {
  std::vector<int> map;
  std::vector<bool> used(g2.n(), false);
  int cost = 0;
  for (std::size_t u = 0; u < g1.n(); ++u) {
    int best_v = kDeleted;
    int best_c = step_cost(g1, g2, map, u, kDeleted);
    for (std::size_t v = 0; v < g2.n(); ++v) {
      if (used[v]) continue;
      const int c = step_cost(g1, g2, map, u, static_cast<int>(v));
      if (c < best_c) {
        best_c = c;
        best_v = static_cast<int>(v);
      }
    }
    map.push_back(best_v);
    if (best_v != kDeleted) used[static_cast<std::size_t>(best_v)] = true;
    cost += best_c;
  }
  return {cost + completion_cost(g2, used), false};
}

}  // namespace ged_detail

/// Graph edit distance with unit costs for node insertion, deletion and
/// relabelling and for edge insertion, deletion and relabelling.
///
/// Exact A* over partial node mappings when both graphs have at most
/// `kExactGedMaxNodes` nodes and the search stays within `max_expansions`;
/// otherwise a greedy mapping gives an upper bound and `exact` is false.
inline GedResult graph_edit_distance(const LabeledGraph& g1, const LabeledGraph& g2, std::size_t max_expansions = 2'000'000) {
  using namespace ged_detail;
  if (g1.n() > kExactGedMaxNodes || g2.n() > kExactGedMaxNodes) return greedy(g1, g2);
  if (g1.n() == 0) return {completion_cost(g2, std::vector<bool>(g2.n(), false)), true};

  struct State {
    int f, g;
    std::uint64_t seq;
    std::vector<int> map;
  };
  auto worse = [](const State& a, const State& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.map.size() != b.map.size()) return a.map.size() < b.map.size();
    return a.seq > b.seq;
  };
  std::priority_queue<State, std::vector<State>, decltype(worse)> open(worse);
  std::uint64_t seq = 0;
  const std::vector<bool> none(g2.n(), false);
  open.push({heuristic(g1, g2, 0, none), 0, seq++, {}});
  std::size_t expansions = 0;
  std::vector<bool> used(g2.n());
  while (!open.empty()) {
    State s = open.top();
    open.pop();
    std::fill(used.begin(), used.end(), false);
    for (int v : s.map)
      if (v != kDeleted) used[static_cast<std::size_t>(v)] = true;
    const std::size_t u = s.map.size();
    if (u == g1.n()) return {s.g, true};  // goal states carry their completion cost
    if (++expansions > max_expansions) return greedy(g1, g2);
    std::vector<int> options;
    for (std::size_t v = 0; v < g2.n(); ++v)
      if (!used[v]) options.push_back(static_cast<int>(v));
    options.push_back(kDeleted);
    for (int v : options) {
      State t{0, s.g + step_cost(g1, g2, s.map, u, v), seq++, s.map};
      t.map.push_back(v);
      if (v != kDeleted) used[static_cast<std::size_t>(v)] = true;
      if (u + 1 == g1.n()) {
        t.g += completion_cost(g2, used);
        t.f = t.g;
      } else {
        t.f = t.g + heuristic(g1, g2, u + 1, used);
      }
      if (v != kDeleted) used[static_cast<std::size_t>(v)] = false;
      open.push(std::move(t));
    }
  }
  return {0, true};
}

}  // namespace itl
