#pragma once

#include <array>
#include <string>
#include <vector>

#include "itl/model/model.hpp"

namespace itl {

enum class NegativePolicy { all_pairs, balanced_sample };

inline const char* negative_policy_name(NegativePolicy p) {
  return p == NegativePolicy::all_pairs ? "all_pairs" : "balanced_sample";
}

inline NegativePolicy parse_negative_policy(const std::string& s) {
  if (s == "all_pairs") return NegativePolicy::all_pairs;
  if (s == "balanced_sample") return NegativePolicy::balanced_sample;
  throw invalid_input("unknown negative policy '" + s + "' (expected all_pairs or balanced_sample)");
}

struct LossConfig {
  double lambda1 = 1.0;  // wall
  double lambda2 = 1.0;  // spatial
  NegativePolicy negative_policy = NegativePolicy::all_pairs;
  double per_iteration_weight = 1.0;

  void validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw invalid_input("loss lambdas must be non-negative");
    if (!(per_iteration_weight >= 0.0)) throw invalid_input("per_iteration_weight must be non-negative");
  }
  bool operator==(const LossConfig&) const = default;
};

/// Mean BCE over the pairs selected by `pair_mask` (upper triangle only).
inline ad::Var edge_bce(const ad::Var& pred, const Tensor& target, const Tensor& pair_mask) {
  for (std::size_t i = 0; i < pair_mask.rows() && i < pair_mask.cols(); ++i) {
    if (pair_mask(i, i) != 0.0) throw invalid_input("edge_bce: pair mask must exclude the diagonal");
  }
  return ad::bce(pred, target, pair_mask);
}

/// Per-relation loss masks (door, wall, spatial order of `Relation`).
using RelationMasks = std::array<Tensor, 3>;

/// all_pairs: every trainable pair for every relation. balanced_sample: the
/// relation's positives plus an equal number of randomly drawn negatives.
inline RelationMasks loss_masks(const TaskInstance& inst, NegativePolicy policy, Rng* rng) {
  const Tensor base = training_pair_mask(inst);
  RelationMasks masks{base, base, base};
  if (policy == NegativePolicy::all_pairs) return masks;
  if (rng == nullptr) throw invalid_input("balanced_sample needs a random generator");
  for (Relation r : {Relation::door, Relation::wall, Relation::spatial}) {
    const Tensor& y = inst.target.channel(r);
    std::vector<std::size_t> pos, neg;
    for (std::size_t k = 0; k < base.size(); ++k) {
      if (base[k] == 0.0) continue;
      (y[k] >= 0.5 ? pos : neg).push_back(k);
    }
    if (pos.empty() || neg.empty()) continue;
    rng->shuffle(std::span<std::size_t>(neg));
    Tensor m(base.rows(), base.cols());
    for (std::size_t k : pos) m[k] = 1.0;
    for (std::size_t k = 0; k < std::min(pos.size(), neg.size()); ++k) m[neg[k]] = 1.0;
    masks[static_cast<std::size_t>(r)] = std::move(m);
  }
  return masks;
}

/// L_door + lambda1 L_wall + lambda2 L_spatial on the decoder output, plus
/// per_iteration_weight times the same combination on every intermediate
/// adjacency. Channels a variant does not produce are skipped.
inline ad::Var total_loss(const model::ForwardVars& f, const TaskInstance& inst, const LossConfig& cfg,
                          const RelationMasks& masks) {
  auto combination = [&](const model::AdjVars& a) {
    ad::Var acc;
    auto add = [&](Relation r, double w) {
      const ad::Var& p = a.channel(r);
      if (w == 0.0 || !p.valid()) return;
      ad::Var term = edge_bce(p, inst.target.channel(r), masks[static_cast<std::size_t>(r)]);
      if (w != 1.0) term = term * w;
      acc = acc.valid() ? acc + term : term;
    };
    add(Relation::door, 1.0);
    add(Relation::wall, cfg.lambda1);
    add(Relation::spatial, cfg.lambda2);
    return acc;
  };
  ad::Var loss = combination(f.predictions);
  if (cfg.per_iteration_weight > 0.0) {
    for (const model::AdjVars& a : f.per_iteration) {
      ad::Var it = combination(a);
      if (!it.valid()) continue;
      loss = loss.valid() ? loss + it * cfg.per_iteration_weight : it * cfg.per_iteration_weight;
    }
  }
  if (!loss.valid()) throw invalid_input("total_loss: every loss term has zero weight");
  return loss;
}

}  // namespace itl
