#pragma once

// Independent loop implementations shared by the unit tests and the
// acceptance harness. Nothing here touches the tape.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "itl/itl.hpp"

namespace itl_test {

using itl::ItlConfig;
using itl::MultiAdjacency;
using itl::ParamSet;
using itl::Relation;
using itl::ScoredPair;
using itl::Tensor;
using itl::Variant;

// Model layers.

inline double act(double v, itl::Nonlinearity n) {
  switch (n) {
    case itl::Nonlinearity::elu: return v > 0 ? v : std::exp(v) - 1.0;
    case itl::Nonlinearity::relu: return v > 0 ? v : 0.0;
    case itl::Nonlinearity::tanh: return std::tanh(v);
  }
  return v;
}

inline double sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Tensor ref_pair_logits(const ParamSet& ps, const std::string& prefix, const Tensor& x, const Tensor* a,
                       std::size_t layers, itl::Nonlinearity n) {
  const std::size_t N = x.rows(), F = x.cols();
  Tensor out(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const Tensor& wi = ps.at(prefix + ".wi");
      const Tensor& wj = ps.at(prefix + ".wj");
      const Tensor& b1 = ps.at(prefix + ".b1");
      std::vector<double> h(b1.cols());
      for (std::size_t u = 0; u < h.size(); ++u) {
        double s = b1(0, u);
        for (std::size_t f = 0; f < F; ++f) s += x(i, f) * wi(f, u) + x(j, f) * wj(f, u);
        if (a != nullptr) s += (*a)(i, j) * ps.at(prefix + ".wa")(0, u);
        h[u] = s;
      }
      for (std::size_t l = 2; l <= layers; ++l) {
        const Tensor& w = ps.at(prefix + ".w" + std::to_string(l));
        const Tensor& b = ps.at(prefix + ".b" + std::to_string(l));
        std::vector<double> next(w.cols());
        for (std::size_t v = 0; v < next.size(); ++v) {
          double s = b(0, v);
          for (std::size_t u = 0; u < h.size(); ++u) s += act(h[u], n) * w(u, v);
          next[v] = s;
        }
        h = next;
      }
      out(i, j) = h[0];
    }
  }
  return out;
}

inline Tensor ref_sym_prob(const Tensor& L, bool unit_diag) {
  const std::size_t N = L.rows();
  Tensor p(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) p(i, j) = (unit_diag && i == j) ? 1.0 : sigm(0.5 * (L(i, j) + L(j, i)));
  return p;
}

inline MultiAdjacency ref_update_topology(const ParamSet& ps, const ItlConfig& cfg, const std::string& block, const Tensor& x,
                                   const MultiAdjacency& a) {
  MultiAdjacency out(x.rows());
  for (Relation r : {Relation::door, Relation::wall}) {
    const Tensor L = ref_pair_logits(ps, block + ".score." + itl::relation_name(r), x, &a.channel(r),
                                     cfg.scoring_mlp_dims.size(), cfg.nonlinearity);
    out.channel(r) = ref_sym_prob(L, true);
  }
  for (std::size_t k = 0; k < out.spatial.size(); ++k) out.spatial[k] = std::min(1.0, std::max(0.0, out.door[k] + out.wall[k]));
  return out;
}

inline Tensor ref_attention(const ParamSet& ps, const std::string& prefix, const Tensor& x, const Tensor& a, const ItlConfig& cfg) {
  const std::size_t N = x.rows(), H = x.cols();
  const Tensor& src = ps.at(prefix + ".src");
  const Tensor& dst = ps.at(prefix + ".dst");
  Tensor beta(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> e(N, 0.0);
    double mx = -INFINITY;
    for (std::size_t j = 0; j < N; ++j) {
      if (a(i, j) < cfg.tau) continue;
      double s = 0.0;
      for (std::size_t h = 0; h < H; ++h) s += x(i, h) * src(h, 0) + x(j, h) * dst(h, 0);
      e[j] = s < 0 ? cfg.attention_leak * s : s;
      mx = std::max(mx, e[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      if (a(i, j) >= cfg.tau) z += std::exp(e[j] - mx);
    for (std::size_t j = 0; j < N; ++j) beta(i, j) = a(i, j) >= cfg.tau ? std::exp(e[j] - mx) / z : 0.0;
  }
  return beta;
}

inline Tensor ref_node_update(const ParamSet& ps, const ItlConfig& cfg, const std::string& block, const Tensor& x,
                       const MultiAdjacency& a) {
  const std::size_t N = x.rows(), H = x.cols();
  const Relation rels[2] = {Relation::door, Relation::wall};
  const Tensor& alpha = ps.at(block + ".alpha");
  const double m = std::max(alpha(0, 0), alpha(0, 1));
  const double z = std::exp(alpha(0, 0) - m) + std::exp(alpha(0, 1) - m);
  Tensor out(N, H);
  for (int r = 0; r < 2; ++r) {
    const std::string rn = itl::relation_name(rels[r]);
    const double w_r = std::exp(alpha(0, r) - m) / z;
    const Tensor& A = a.channel(rels[r]);
    const Tensor beta = ref_attention(ps, block + ".attn." + rn, x, A, cfg);
    const Tensor& W = ps.at(block + ".w." + rn);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t o = 0; o < H; ++o) {
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j)
          for (std::size_t h = 0; h < H; ++h) s += beta(i, j) * A(i, j) * x(j, h) * W(h, o);
        out(i, o) += w_r * s;
      }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = act(out[k], cfg.nonlinearity);
  return out;
}

// Fixtures.

inline ItlConfig small_config(Variant v = Variant::full) {
  ItlConfig c;
  c.variant = v;
  c.gat_hidden = 5;
  c.scoring_mlp_dims = {6, 3, 1};
  c.decoder_mlp_dims = {7, 3, 1};
  c.mlp_hidden = 6;
  return c;
}

inline Tensor random_tensor(std::size_t r, std::size_t c, itl::Rng& rng, double scale = 1.0) {
  Tensor t(r, c);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = scale * rng.normal();
  return t;
}

inline MultiAdjacency random_soft_adjacency(std::size_t n, itl::Rng& rng) {
  MultiAdjacency a = MultiAdjacency::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = rng.uniform(), w = rng.uniform();
      a.set_symmetric(Relation::door, i, j, d < 0.3 ? 0.0 : d);
      a.set_symmetric(Relation::wall, i, j, w < 0.3 ? 0.0 : w);
      a.set_symmetric(Relation::spatial, i, j, std::min(1.0, a.door(i, j) + a.wall(i, j)));
    }
  return a;
}

inline itl::BoundParams bind_constants(itl::ad::Tape& t, const ParamSet& ps) {
  itl::BoundParams p;
  for (const auto& [name, value] : ps) p.emplace(name, t.constant(value));
  return p;
}

// Generated plan with random features and a partially observed A0.
inline itl::TaskInstance plan_instance(std::uint64_t seed, std::size_t f = 4) {
  itl::Rng rng(seed);
  const auto fp = itl::generate_floorplan({}, seed, "eq" + std::to_string(seed));
  const auto g = itl::build_graph(fp);
  itl::FeatureMatrix fm;
  fm.x = random_tensor(fp.size(), f, rng);
  fm.layout = {{"basic", 0, f}};
  if (g.edges(Relation::spatial).size() >= 2) return itl::make_completion_instance(fp.id, fm, g, 0.5, seed);
  return itl::make_generation_instance(fp.id, fm, g);
}

inline Tensor permute(const Tensor& m, const std::vector<std::size_t>& perm, bool square) {
  Tensor out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = square ? m(perm[i], perm[j]) : m(perm[i], j);
  return out;
}

inline MultiAdjacency permute(const MultiAdjacency& a, const std::vector<std::size_t>& perm) {
  MultiAdjacency out(a.n);
  for (Relation r : itl::kRelations) out.channel(r) = permute(a.channel(r), perm, true);
  return out;
}

// Loss.

inline double ref_bce(const Tensor& p, const Tensor& y, const Tensor& mask) {
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      const double q = std::min(1.0 - 1e-7, std::max(1e-7, p(i, j)));
      s += mask(i, j) * -(y(i, j) * std::log(q) + (1.0 - y(i, j)) * std::log(1.0 - q));
      w += mask(i, j);
    }
  return s / w;
}

// Ranking metrics.

// Every (positive, negative) comparison, ties worth one half.
inline double brute_auc(const std::vector<ScoredPair>& s) {
  double wins = 0.0, total = 0.0;
  for (const auto& p : s)
    for (const auto& n : s) {
      if (p.label == 0 || n.label != 0) continue;
      total += 1.0;
      wins += p.score > n.score ? 1.0 : p.score == n.score ? 0.5 : 0.0;
    }
  return wins / total;
}

// Precision at each positive's rank, averaged. Rank order is score descending,
// then index ascending.
inline double brute_ap(const std::vector<ScoredPair>& s) {
  double sum = 0.0;
  int pos = 0;
  for (const auto& p : s) {
    if (p.label == 0) continue;
    ++pos;
    int above = 0, tp = 0;
    for (const auto& q : s) {
      const bool ahead = q.score > p.score || (q.score == p.score && q.index <= p.index);
      if (!ahead) continue;
      ++above;
      tp += q.label != 0;
    }
    sum += static_cast<double>(tp) / above;
  }
  return sum / pos;
}

// Graph edit distance.

// Every injective partial node mapping; unit costs.
inline int brute_ged(const itl::LabeledGraph& a, const itl::LabeledGraph& b) {
  const std::size_t n1 = a.n(), n2 = b.n();
  std::vector<int> map(n1, -1);
  std::vector<bool> used(n2, false);
  int best = 1 << 30;
  std::function<void(std::size_t)> rec = [&](std::size_t u) {
    if (u == n1) {
      int c = 0;
      for (std::size_t i = 0; i < n1; ++i) c += map[i] < 0 ? 1 : a.labels[i] != b.labels[map[i]];
      for (std::size_t v = 0; v < n2; ++v) c += !used[v];
      std::vector<std::vector<bool>> covered(n2, std::vector<bool>(n2, false));
      for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = i + 1; j < n1; ++j) {
          if (map[i] < 0 || map[j] < 0) {
            c += a.edge[i][j] != 0;
            continue;
          }
          covered[map[i]][map[j]] = covered[map[j]][map[i]] = true;
          c += a.edge[i][j] != b.edge[map[i]][map[j]];
        }
      for (std::size_t v = 0; v < n2; ++v)
        for (std::size_t w = v + 1; w < n2; ++w) c += !covered[v][w] && b.edge[v][w] != 0;
      best = std::min(best, c);
      return;
    }
    map[u] = -1;
    rec(u + 1);
    for (std::size_t v = 0; v < n2; ++v) {
      if (used[v]) continue;
      used[v] = true;
      map[u] = static_cast<int>(v);
      rec(u + 1);
      used[v] = false;
    }
    map[u] = -1;
  };
  rec(0);
  return best;
}

inline itl::LabeledGraph random_graph(itl::Rng& rng, std::size_t n) {
  itl::LabeledGraph g(n);
  for (std::size_t i = 0; i < n; ++i) g.labels[i] = 1 + static_cast<int>(rng.below(3));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(0.4)) g.connect(i, j, 1 + static_cast<int>(rng.below(3)));
  return g;
}

}  // namespace itl_test
