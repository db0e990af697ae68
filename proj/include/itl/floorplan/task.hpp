#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "itl/diffcore/rng.hpp"
#include "itl/features/feature_matrix.hpp"
#include "itl/floorplan/graph.hpp"

namespace itl {

enum class TaskKind { generation, completion };

inline const char* task_name(TaskKind t) { return t == TaskKind::generation ? "generate" : "complete"; }

inline TaskKind parse_task(const std::string& s) {
  if (s == "generate" || s == "generation") return TaskKind::generation;
  if (s == "complete" || s == "completion") return TaskKind::completion;
  throw invalid_input("unknown task '" + s + "' (expected generate or complete)");
}

/// One model input: features, initial topology A0, ground truth, and the
/// pairs that are scored at evaluation time.
struct TaskInstance {
  std::string floorplan_id;
  TaskKind kind = TaskKind::generation;
  FeatureMatrix features;
  MultiAdjacency a0;
  MultiAdjacency target;
  std::vector<Pair> heldout;
  double observe_fraction = 0.0;

  std::size_t n() const { return target.n; }
  bool operator==(const TaskInstance&) const = default;
};

/// Pairs that carry loss during training: every off-diagonal pair for
/// generation, every pair not observed in A0 for completion. Upper triangle
/// set to 1.
inline Tensor training_pair_mask(const TaskInstance& inst) {
  const std::size_t n = inst.n();
  Tensor m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool observed = inst.kind == TaskKind::completion && inst.a0.spatial(i, j) != 0.0;
      m(i, j) = observed ? 0.0 : 1.0;
    }
  return m;
}

/// A0 = identity on every channel; all pairs i < j are scored.
inline TaskInstance make_generation_instance(const std::string& id, const FeatureMatrix& features,
                                             const MultiAdjacency& target) {
  if (features.n() != target.n) throw invalid_input("feature rows do not match graph size for '" + id + "'");
  TaskInstance t;
  t.floorplan_id = id;
  t.kind = TaskKind::generation;
  t.features = features;
  t.a0 = MultiAdjacency::identity(target.n);
  t.target = target;
  for (std::size_t i = 0; i < target.n; ++i)
    for (std::size_t j = i + 1; j < target.n; ++j) t.heldout.push_back({static_cast<int>(i), static_cast<int>(j)});
  return t;
}

inline constexpr double kHeldoutFraction = 0.2;

/// Partial-topology instance.
///
/// The ground-truth spatial edges are shuffled once with `seed`. The first
/// round(20%) of them (at least one) form the fixed held-out positives; the
/// observed edges are taken from the other end of the same order, so the
/// held-out set does not depend on `observe_fraction`. Observed entries are
/// copied onto the door and wall channels as well (edge type unknown). The
/// held-out pairs add an equal number of sampled non-edges.
inline TaskInstance make_completion_instance(const std::string& id, const FeatureMatrix& features,
                                             const MultiAdjacency& target, double observe_fraction,
                                             std::uint64_t seed) {
  if (!(observe_fraction >= 0.0 && observe_fraction <= 1.0)) {
    throw invalid_input("observe_fraction " + std::to_string(observe_fraction) + " outside [0, 1]");
  }
  if (features.n() != target.n) throw invalid_input("feature rows do not match graph size for '" + id + "'");
  std::vector<Pair> edges = target.edges(Relation::spatial);
  const std::size_t m = edges.size();
  if (m < 2) throw invalid_input("completion instance for '" + id + "' needs at least 2 spatial edges");

  Rng rng(mix_seed(seed, hash_string(id)));
  rng.shuffle(std::span<Pair>(edges));

  std::size_t heldout_pos = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kHeldoutFraction * m)));
  std::size_t observed = static_cast<std::size_t>(std::lround(observe_fraction * static_cast<double>(m)));
  if (observe_fraction >= 1.0) {
    observed = m;
    heldout_pos = 0;
  } else {
    observed = std::min(observed, m - heldout_pos);
  }

  TaskInstance t;
  t.floorplan_id = id;
  t.kind = TaskKind::completion;
  t.features = features;
  t.target = target;
  t.observe_fraction = observe_fraction;
  t.a0 = MultiAdjacency::identity(target.n);
  for (std::size_t k = 0; k < observed; ++k) {
    const Pair p = edges[m - 1 - k];
    for (Relation r : kRelations) t.a0.set_symmetric(r, p.i, p.j, 1.0);
  }
  t.heldout.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(heldout_pos));

  std::vector<Pair> non_edges;
  for (std::size_t i = 0; i < target.n; ++i)
    for (std::size_t j = i + 1; j < target.n; ++j)
      if (target.spatial(i, j) == 0.0) non_edges.push_back({static_cast<int>(i), static_cast<int>(j)});
  rng.shuffle(std::span<Pair>(non_edges));
  const std::size_t negatives = std::min(heldout_pos, non_edges.size());
  t.heldout.insert(t.heldout.end(), non_edges.begin(), non_edges.begin() + static_cast<std::ptrdiff_t>(negatives));
  std::sort(t.heldout.begin(), t.heldout.end());
  return t;
}

/// Symmetric k-nearest-neighbour graph in feature space, copied onto all three
/// channels. Ties in distance go to the lower node index. Diagonal is zero.
inline MultiAdjacency knn_graph(const Tensor& x, std::size_t k) {
  const std::size_t n = x.rows();
  if (k == 0) throw invalid_input("knn_graph: k must be positive");
  if (k >= n) throw invalid_input("knn_graph: k=" + std::to_string(k) + " must be smaller than N=" + std::to_string(n));
  Tensor adj(n, n);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - x(j, c);
        d += diff * diff;
      }
      cand.emplace_back(d, j);
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t r = 0; r < k; ++r) {
      adj(i, cand[r].second) = 1.0;
      adj(cand[r].second, i) = 1.0;
    }
  }
  MultiAdjacency out(n);
  out.door = out.wall = out.spatial = adj;
  return out;
}

}  // namespace itl
