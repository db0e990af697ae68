#pragma once

#include <optional>
#include <string>
#include <vector>

#include "itl/diffcore/ops.hpp"
#include "itl/floorplan/task.hpp"
#include "itl/model/init.hpp"

namespace itl::model {

/// Soft multi-relational adjacency held on a tape. Channels a variant does not
/// produce are left invalid.
struct AdjVars {
  ad::Var door, wall, spatial;
  const ad::Var& channel(Relation r) const { return r == Relation::door ? door : r == Relation::wall ? wall : spatial; }
  ad::Var& channel(Relation r) { return r == Relation::door ? door : r == Relation::wall ? wall : spatial; }
};

inline AdjVars constant_adjacency(ad::Tape& t, const MultiAdjacency& a) {
  return {t.constant(a.door), t.constant(a.wall), t.constant(a.spatial)};
}

inline ad::Var activate(const ad::Var& x, Nonlinearity n) {
  switch (n) {
    case Nonlinearity::elu: return ad::elu(x);
    case Nonlinearity::relu: return ad::leaky_relu(x, 0.0);
    case Nonlinearity::tanh: return ad::tanh(x);
  }
  return x;
}

/// Logits of a pairwise MLP for every ordered pair: entry (i, j) scores
/// [x_i, a_ij, x_j]. The first layer decomposes as x_i wi + a_ij wa + x_j wj,
/// so all n^2 inputs are formed from two n x d products.
inline ad::Var pair_mlp_logits(const BoundParams& p, const std::string& prefix, const ad::Var& x, const ad::Var* a,
                               std::size_t layers, Nonlinearity act) {
  const std::size_t n = x.rows();
  ad::Var h = ad::pair_sum(ad::matmul(x, param(p, prefix + ".wi")), ad::matmul(x, param(p, prefix + ".wj")));
  if (a != nullptr) h = h + ad::matmul(ad::reshape(*a, n * n, 1), param(p, prefix + ".wa"));
  h = ad::add_row(h, param(p, prefix + ".b1"));
  for (std::size_t l = 2; l <= layers; ++l) {
    h = activate(h, act);
    h = ad::add_row(ad::matmul(h, param(p, prefix + ".w" + std::to_string(l))), param(p, prefix + ".b" + std::to_string(l)));
  }
  return ad::reshape(h, n, n);
}

/// sigmoid of the average of both orderings, so the result is symmetric.
inline ad::Var symmetric_probability(const ad::Var& logits) {
  return ad::sigmoid((logits + ad::transpose(logits)) * 0.5);
}

inline ad::Var force_unit_diagonal(ad::Tape& t, const ad::Var& m) {
  const std::size_t n = m.rows();
  Tensor off(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) off(i, i) = 0.0;
  return ad::mul(m, t.constant(off)) + t.constant(Tensor::identity(n));
}

/// One topology update: each block relation is re-scored from the current
/// embeddings and its previous soft adjacency. The spatial channel is the
/// clamped sum of door and wall; the diagonal stays 1.
inline AdjVars update_topology(const ad::Var& x, const AdjVars& a, const BoundParams& p, const ItlConfig& cfg,
                               const std::string& block) {
  if (!x.value().all_finite()) throw invalid_input("update_topology: non-finite node embeddings");
  ad::Tape& t = *x.tape();
  const std::size_t layers = cfg.scoring_mlp_dims.size();
  AdjVars out;
  for (Relation r : block_relations(cfg)) {
    const ad::Var& prev = a.channel(r);
    if (!prev.value().all_finite()) throw invalid_input("update_topology: non-finite adjacency");
    const ad::Var logits = pair_mlp_logits(p, block + ".score." + relation_name(r), x, &prev, layers, cfg.nonlinearity);
    out.channel(r) = force_unit_diagonal(t, symmetric_probability(logits));
  }
  if (cfg.variant != Variant::no_mr_gat) out.spatial = ad::clamp(out.door + out.wall, 0.0, 1.0);
  return out;
}

/// Softmax-normalised attention over each row's soft neighbourhood
/// {j : a_ij >= tau}; e_ij = leaky_relu(x_i . src + x_j . dst).
inline ad::Var attention_coefficients(const ad::Var& x, const ad::Var& a_r, const BoundParams& p, const std::string& prefix,
                                      const ItlConfig& cfg) {
  const std::size_t n = x.rows();
  const ad::Var e = ad::reshape(ad::pair_sum(ad::matmul(x, param(p, prefix + ".src")), ad::matmul(x, param(p, prefix + ".dst"))), n, n);
  Tensor mask(n, n);
  const Tensor& av = a_r.value();
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = av[i] >= cfg.tau ? 1.0 : 0.0;
  return ad::masked_row_softmax(ad::leaky_relu(e, cfg.attention_leak), mask);
}

struct NodeUpdate {
  ad::Var x;
  ad::Var mixing;  // 1 x R relation weights, invalid for a single relation
};

/// X' = act( sum_r w_r (beta_r o A_r) X W_r ) with w = softmax(alpha).
inline NodeUpdate node_update(const ad::Var& x, const AdjVars& a, const BoundParams& p, const ItlConfig& cfg,
                              const std::string& block) {
  const auto rels = block_relations(cfg);
  std::vector<ad::Var> messages;
  for (Relation r : rels) {
    const std::string rn = relation_name(r);
    const ad::Var beta = attention_coefficients(x, a.channel(r), p, block + ".attn." + rn, cfg);
    const ad::Var abar = ad::mul(beta, a.channel(r));
    messages.push_back(ad::matmul(ad::matmul(abar, x), param(p, block + ".w." + rn)));
  }
  NodeUpdate out;
  if (rels.size() == 1) {
    out.x = activate(messages.front(), cfg.nonlinearity);
    return out;
  }
  const ad::Var& alpha = param(p, block + ".alpha");
  out.mixing = ad::masked_row_softmax(alpha, Tensor(1, rels.size(), 1.0));
  ad::Var mixed = ad::scale_by(messages[0], ad::element(out.mixing, 0, 0));
  for (std::size_t k = 1; k < rels.size(); ++k) mixed = mixed + ad::scale_by(messages[k], ad::element(out.mixing, 0, k));
  out.x = activate(mixed, cfg.nonlinearity);
  return out;
}

struct Encoding {
  ad::Var x;
  AdjVars a;
  std::vector<AdjVars> per_iteration;
  std::vector<ad::Var> mixing;
};

/// K blocks of (topology update, node update). With K = 0 the input features
/// and A0 pass through untouched.
inline Encoding encode(const ad::Var& x0, const AdjVars& a0, const BoundParams& p, const ItlConfig& cfg) {
  Encoding enc{x0, a0, {}, {}};
  const int K = cfg.effective_k();
  if (K == 0) return enc;
  ad::Var h = ad::matmul(x0, param(p, "proj.w"));
  AdjVars a = a0;
  for (int k = 0; k < K; ++k) {
    const std::string b = block_prefix(cfg, k);
    a = update_topology(h, a, p, cfg, b);
    enc.per_iteration.push_back(a);
    NodeUpdate u = node_update(h, a, p, cfg, b);
    h = u.x;
    if (u.mixing.valid()) enc.mixing.push_back(u.mixing);
  }
  enc.x = h;
  enc.a = a;
  return enc;
}

/// Edge probabilities from embeddings, optionally concatenated with X0.
inline AdjVars decode(const ad::Var& xk, const ad::Var& x0, const BoundParams& p, const ItlConfig& cfg) {
  ad::Var h = xk;
  if (cfg.use_long_skip()) {
    if (x0.rows() != xk.rows()) throw invalid_input("decode: long skip needs X0 with " + std::to_string(xk.rows()) + " rows");
    h = ad::concat_cols(xk, x0);
  }
  AdjVars out;
  const std::size_t layers = cfg.decoder_mlp_dims.size();
  for (Relation r : decoder_relations(cfg)) {
    out.channel(r) = symmetric_probability(pair_mlp_logits(p, std::string("dec.") + relation_name(r), h, nullptr, layers, cfg.nonlinearity));
  }
  if (cfg.variant != Variant::no_mr_decoder) out.spatial = ad::clamp(out.door + out.wall, 0.0, 1.0);
  return out;
}

}  // namespace itl::model
