#pragma once

#include <map>
#include <string>

#include "itl/diffcore/tape.hpp"

namespace itl {

/// Named learnable tensors. std::map keeps iteration order deterministic.
using ParamSet = std::map<std::string, Tensor>;

/// Parameters registered as leaves on one tape.
using BoundParams = std::map<std::string, ad::Var>;

inline BoundParams bind_params(ad::Tape& tape, const ParamSet& params) {
  BoundParams out;
  for (const auto& [name, value] : params) out.emplace(name, tape.leaf(value, true));
  return out;
}

inline ParamSet collect_grads(const ad::Tape& tape, const BoundParams& bound) {
  ParamSet out;
  for (const auto& [name, var] : bound) out.emplace(name, tape.grad(var));
  return out;
}

inline std::size_t count_scalars(const ParamSet& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

inline const ad::Var& param(const BoundParams& bound, const std::string& name) {
  auto it = bound.find(name);
  if (it == bound.end()) throw invalid_input("missing parameter '" + name + "'");
  return it->second;
}

}  // namespace itl
