#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "itl/diffcore/tensor.hpp"
#include "itl/floorplan/floorplan.hpp"

namespace itl {

enum class Relation { door = 0, wall = 1, spatial = 2 };

inline constexpr std::array<Relation, 3> kRelations{Relation::spatial, Relation::wall, Relation::door};

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::door: return "door";
    case Relation::wall: return "wall";
    case Relation::spatial: return "spatial";
  }
  return "?";
}

/// Unordered node pair, stored with first < second.
struct Pair {
  int i = 0;
  int j = 0;
  bool operator==(const Pair&) const = default;
  auto operator<=>(const Pair&) const = default;
};

inline Pair make_pair_ordered(int a, int b) { return a < b ? Pair{a, b} : Pair{b, a}; }

/// Per-relation n x n adjacency (door / wall / spatial) with values in [0, 1].
struct MultiAdjacency {
  std::size_t n = 0;
  Tensor door;
  Tensor wall;
  Tensor spatial;

  MultiAdjacency() = default;
  explicit MultiAdjacency(std::size_t nodes) : n(nodes), door(nodes, nodes), wall(nodes, nodes), spatial(nodes, nodes) {}

  static MultiAdjacency identity(std::size_t nodes) {
    MultiAdjacency a(nodes);
    a.door = a.wall = a.spatial = Tensor::identity(nodes);
    return a;
  }

  Tensor& channel(Relation r) { return r == Relation::door ? door : r == Relation::wall ? wall : spatial; }
  const Tensor& channel(Relation r) const { return r == Relation::door ? door : r == Relation::wall ? wall : spatial; }

  /// Off-diagonal pairs (i < j) whose entry on `r` is at least `threshold`.
  std::vector<Pair> edges(Relation r, double threshold = 0.5) const {
    std::vector<Pair> out;
    const Tensor& m = channel(r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (m(i, j) >= threshold) out.push_back({static_cast<int>(i), static_cast<int>(j)});
    return out;
  }

  void set_symmetric(Relation r, std::size_t i, std::size_t j, double v) {
    channel(r)(i, j) = v;
    channel(r)(j, i) = v;
  }

  bool operator==(const MultiAdjacency&) const = default;
};

/// Violations of the ground-truth invariants (empty when valid): binary
/// entries, zero diagonal, symmetry, door/wall exclusivity, spatial = door OR wall.
inline std::vector<std::string> ground_truth_violations(const MultiAdjacency& a) {
  std::vector<std::string> out;
  auto at = [](std::size_t i, std::size_t j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; };
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.n; ++j) {
      for (Relation r : kRelations) {
        const double v = a.channel(r)(i, j);
        if (v != 0.0 && v != 1.0) out.push_back(std::string(relation_name(r)) + " non-binary at " + at(i, j));
        if (v != a.channel(r)(j, i)) out.push_back(std::string(relation_name(r)) + " asymmetric at " + at(i, j));
        if (i == j && v != 0.0) out.push_back(std::string(relation_name(r)) + " diagonal set at " + at(i, j));
      }
      if (a.door(i, j) == 1.0 && a.wall(i, j) == 1.0) out.push_back("door and wall both set at " + at(i, j));
      const double either = (a.door(i, j) == 1.0 || a.wall(i, j) == 1.0) ? 1.0 : 0.0;
      if (a.spatial(i, j) != either) out.push_back("spatial != door OR wall at " + at(i, j));
    }
  return out;
}

/// True when every node is reachable from node 0 over entries >= 0.5 of `r`.
inline bool relation_connected(const MultiAdjacency& a, Relation r) {
  if (a.n == 0) return true;
  const Tensor& m = a.channel(r);
  std::vector<bool> seen(a.n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < a.n; ++v)
      if (!seen[v] && m(u, v) >= 0.5) {
        seen[v] = true;
        ++reached;
        stack.push_back(v);
      }
  }
  return reached == a.n;
}

inline constexpr double kDefaultContactEpsilon = 0.05;

/// Ground-truth multi-relational graph of a floorplan.
///
/// Door (visual) edges come from door and opening links in either direction;
/// wall edges join rooms sharing more than `contact_epsilon` metres of
/// boundary without a door; spatial is their union.
inline MultiAdjacency build_graph(const Floorplan& fp, double contact_epsilon = kDefaultContactEpsilon) {
  const std::size_t n = fp.rooms.size();
  for (const Room& r : fp.rooms)
    for (const auto* links : {&r.door_links, &r.opening_links})
      for (int j : *links)
        if (j < 0 || j >= static_cast<int>(n) || j == r.id) {
          throw invalid_input("floorplan '" + fp.id + "': room " + std::to_string(r.id) + " has dangling link to " +
                              std::to_string(j));
        }
  MultiAdjacency g(n);
  for (const Room& r : fp.rooms)
    for (const auto* links : {&r.door_links, &r.opening_links})
      for (int j : *links) g.set_symmetric(Relation::door, static_cast<std::size_t>(r.id), static_cast<std::size_t>(j), 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (g.door(i, j) == 1.0) continue;
      if (shared_boundary_length(fp.rooms[i].polygon, fp.rooms[j].polygon) > contact_epsilon) {
        g.set_symmetric(Relation::wall, i, j, 1.0);
      }
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.spatial(i, j) = (g.door(i, j) == 1.0 || g.wall(i, j) == 1.0) ? 1.0 : 0.0;
  return g;
}

}  // namespace itl
