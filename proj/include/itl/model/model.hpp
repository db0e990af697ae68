#pragma once

#include <algorithm>
#include <vector>

#include "itl/model/itl.hpp"

namespace itl::model {

/// Everything a forward pass leaves on the tape.
struct ForwardVars {
  AdjVars predictions;
  std::vector<AdjVars> per_iteration;
  std::vector<ad::Var> mixing;
};

/// Node-wise two-layer MLP; never looks at A0.
inline ad::Var mlp_encoder(const ad::Var& x0, const BoundParams& p, const ItlConfig& cfg) {
  ad::Var h = activate(ad::add_row(ad::matmul(x0, param(p, "enc.w1")), param(p, "enc.b1")), cfg.nonlinearity);
  return activate(ad::add_row(ad::matmul(h, param(p, "enc.w2")), param(p, "enc.b2")), cfg.nonlinearity);
}

/// Single GAT layer over a kNN graph of the input features with self loops.
/// k is capped at N - 1 for very small graphs.
inline ad::Var gat_knn_encoder(ad::Tape& t, const ad::Var& x0, const BoundParams& p, const ItlConfig& cfg) {
  const std::size_t n = x0.rows();
  Tensor adj = Tensor::identity(n);
  if (n > 1) {
    const MultiAdjacency knn = knn_graph(x0.value(), std::min<std::size_t>(static_cast<std::size_t>(cfg.knn_k), n - 1));
    for (std::size_t i = 0; i < adj.size(); ++i) adj[i] = std::max(adj[i], knn.spatial[i]);
  }
  const ad::Var a = t.constant(adj);
  const ad::Var beta = attention_coefficients(x0, a, p, "gat.attn", cfg);
  return activate(ad::matmul(ad::matmul(ad::mul(beta, a), x0), param(p, "gat.w")), cfg.nonlinearity);
}

/// Full forward pass for one instance: encoder (or baseline encoder), then the
/// shared decoder.
inline ForwardVars forward(ad::Tape& t, const TaskInstance& inst, const BoundParams& p, const ItlConfig& cfg) {
  if (inst.features.n() != inst.n()) throw invalid_input("forward: feature rows do not match the graph size");
  const ad::Var x0 = t.constant(inst.features.x);
  ForwardVars out;
  switch (cfg.variant) {
    case Variant::mlp:
      out.predictions = decode(mlp_encoder(x0, p, cfg), x0, p, cfg);
      break;
    case Variant::gat_knn:
      out.predictions = decode(gat_knn_encoder(t, x0, p, cfg), x0, p, cfg);
      break;
    default: {
      Encoding enc = encode(x0, constant_adjacency(t, inst.a0), p, cfg);
      out.predictions = decode(enc.x, x0, p, cfg);
      out.per_iteration = std::move(enc.per_iteration);
      out.mixing = std::move(enc.mixing);
    }
  }
  return out;
}

/// Detached predictions.
struct EdgePredictions {
  Tensor p_door, p_wall, p_spatial;
  std::vector<MultiAdjacency> per_iteration;   // missing channels are empty tensors
  std::vector<std::vector<double>> mixing;     // softmax(alpha) per block

  const Tensor& channel(Relation r) const { return r == Relation::door ? p_door : r == Relation::wall ? p_wall : p_spatial; }
  MultiAdjacency as_adjacency() const {
    MultiAdjacency m(p_door.rows());
    m.door = p_door;
    m.wall = p_wall;
    m.spatial = p_spatial;
    return m;
  }
};

inline EdgePredictions detach(const ForwardVars& f) {
  EdgePredictions e;
  e.p_door = f.predictions.door.value();
  e.p_wall = f.predictions.wall.value();
  e.p_spatial = f.predictions.spatial.value();
  for (const AdjVars& a : f.per_iteration) {
    MultiAdjacency m(a.spatial.rows());
    if (a.door.valid()) m.door = a.door.value();
    else m.door = Tensor();
    if (a.wall.valid()) m.wall = a.wall.value();
    else m.wall = Tensor();
    m.spatial = a.spatial.value();
    e.per_iteration.push_back(std::move(m));
  }
  for (const ad::Var& w : f.mixing) e.mixing.push_back(w.value().values());
  return e;
}

inline EdgePredictions predict(const TaskInstance& inst, const ParamSet& params, const ItlConfig& cfg) {
  ad::Tape t;
  BoundParams p;
  for (const auto& [name, value] : params) p.emplace(name, t.constant(value));
  return detach(forward(t, inst, p, cfg));
}

}  // namespace itl::model
