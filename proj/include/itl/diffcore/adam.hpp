#pragma once

#include <cmath>
#include <cstdint>

#include "itl/diffcore/params.hpp"

namespace itl {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates, one pair per parameter.
struct AdamState {
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;

  static AdamState zeros_like(const ParamSet& params) {
    AdamState s;
    for (const auto& [name, t] : params) {
      s.m.emplace(name, Tensor(t.rows(), t.cols()));
      s.v.emplace(name, Tensor(t.rows(), t.cols()));
    }
    return s;
  }
};

/// Bias-corrected Adam update, in place. Parameters without a gradient entry
/// are left untouched.
inline void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, const AdamHyper& h) {
  if (!(h.lr > 0.0)) throw invalid_input("adam_step: learning rate must be positive");
  for (const auto& [name, g] : grads) {
    auto pit = params.find(name);
    if (pit == params.end()) throw invalid_input("adam_step: gradient for unknown parameter '" + name + "'");
    if (!pit->second.same_shape(g)) {
      throw invalid_input("adam_step: shape mismatch for '" + name + "' " + pit->second.shape_string() + " vs " +
                          g.shape_string());
    }
    auto [mit, inserted_m] = state.m.try_emplace(name, g.rows(), g.cols());
    auto [vit, inserted_v] = state.v.try_emplace(name, g.rows(), g.cols());
    if (!mit->second.same_shape(g) || !vit->second.same_shape(g)) {
      throw invalid_input("adam_step: moment shape mismatch for '" + name + "'");
    }
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
  }
}

}  // namespace itl
