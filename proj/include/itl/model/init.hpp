#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "itl/diffcore/params.hpp"
#include "itl/diffcore/rng.hpp"
#include "itl/floorplan/graph.hpp"
#include "itl/model/config.hpp"

namespace itl::model {

/// Relations carried by the encoder blocks.
inline std::vector<Relation> block_relations(const ItlConfig& c) {
  if (c.variant == Variant::no_mr_gat) return {Relation::spatial};
  return {Relation::door, Relation::wall};
}

/// Decoder branches. Only the no_mr_decoder ablation predicts spatial directly.
inline std::vector<Relation> decoder_relations(const ItlConfig& c) {
  if (c.variant == Variant::no_mr_decoder) return {Relation::spatial, Relation::door, Relation::wall};
  return {Relation::door, Relation::wall};
}

inline std::string block_prefix(const ItlConfig& c, int k) {
  return c.share_block_weights ? std::string("block") : "block" + std::to_string(k);
}

inline Tensor glorot(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

/// Pairwise MLP over [x_i, (a_ij), x_j]. The first layer is stored split into
/// `wi`, optional `wa` and `wj`; later layers are `w2`, `b2`, ...
inline void add_pair_mlp(ParamSet& ps, Rng& rng, const std::string& prefix, std::size_t in_dim,
                         const std::vector<int>& dims, bool with_edge_input) {
  const std::size_t d1 = static_cast<std::size_t>(dims.front());
  const std::size_t fan_in = 2 * in_dim + (with_edge_input ? 1 : 0);
  ps[prefix + ".wi"] = glorot(rng, in_dim, d1, fan_in, d1);
  if (with_edge_input) ps[prefix + ".wa"] = glorot(rng, 1, d1, fan_in, d1);
  ps[prefix + ".wj"] = glorot(rng, in_dim, d1, fan_in, d1);
  ps[prefix + ".b1"] = Tensor(1, d1);
  for (std::size_t l = 1; l < dims.size(); ++l) {
    const std::size_t a = static_cast<std::size_t>(dims[l - 1]), b = static_cast<std::size_t>(dims[l]);
    ps[prefix + ".w" + std::to_string(l + 1)] = glorot(rng, a, b, a, b);
    ps[prefix + ".b" + std::to_string(l + 1)] = Tensor(1, b);
  }
}

/// Fresh parameters for `cfg` on inputs with `feature_dim` columns:
/// Glorot-uniform weights, zero biases, zero relation-mixing logits.
inline ParamSet init_params(const ItlConfig& cfg, std::size_t feature_dim, std::uint64_t seed) {
  cfg.validate();
  if (feature_dim == 0) throw invalid_input("feature dimension must be positive");
  Rng rng(seed);
  ParamSet ps;
  const std::size_t H = static_cast<std::size_t>(cfg.gat_hidden);
  std::size_t embed_dim = feature_dim;

  if (cfg.variant == Variant::mlp) {
    const std::size_t M = static_cast<std::size_t>(cfg.mlp_hidden);
    ps["enc.w1"] = glorot(rng, feature_dim, M, feature_dim, M);
    ps["enc.b1"] = Tensor(1, M);
    ps["enc.w2"] = glorot(rng, M, M, M, M);
    ps["enc.b2"] = Tensor(1, M);
    embed_dim = M;
  } else if (cfg.variant == Variant::gat_knn) {
    ps["gat.attn.src"] = glorot(rng, feature_dim, 1, 2 * feature_dim, 1);
    ps["gat.attn.dst"] = glorot(rng, feature_dim, 1, 2 * feature_dim, 1);
    ps["gat.w"] = glorot(rng, feature_dim, H, feature_dim, H);
    embed_dim = H;
  } else if (cfg.effective_k() > 0) {
    ps["proj.w"] = glorot(rng, feature_dim, H, feature_dim, H);
    const int blocks = cfg.share_block_weights ? 1 : cfg.effective_k();
    for (int k = 0; k < blocks; ++k) {
      const std::string b = block_prefix(cfg, k);
      const auto rels = block_relations(cfg);
      for (Relation r : rels) {
        const std::string rn = relation_name(r);
        add_pair_mlp(ps, rng, b + ".score." + rn, H, cfg.scoring_mlp_dims, true);
        ps[b + ".attn." + rn + ".src"] = glorot(rng, H, 1, 2 * H, 1);
        ps[b + ".attn." + rn + ".dst"] = glorot(rng, H, 1, 2 * H, 1);
        ps[b + ".w." + rn] = glorot(rng, H, H, H, H);
      }
      if (rels.size() > 1) ps[b + ".alpha"] = Tensor(1, rels.size());
    }
    embed_dim = cfg.use_long_skip() ? H + feature_dim : H;
  }

  for (Relation r : decoder_relations(cfg)) {
    add_pair_mlp(ps, rng, std::string("dec.") + relation_name(r), embed_dim, cfg.decoder_mlp_dims, false);
  }
  return ps;
}

}  // namespace itl::model
