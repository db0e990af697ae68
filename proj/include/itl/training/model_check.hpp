#pragma once

#include <functional>
#include <map>
#include <string>

#include "itl/diffcore/gradcheck.hpp"
#include "itl/synthgen/generator.hpp"
#include "itl/training/loss.hpp"

namespace itl {

/// A seeded 4-room plan with the full iterative model at reduced widths, so
/// that central differences over every parameter stay cheap.
struct ModelCheckFixture {
  TaskInstance instance;
  ItlConfig model;
  LossConfig loss;
  ParamSet params;
};

inline ModelCheckFixture model_check_fixture(std::uint64_t seed) {
  GenParams gp;
  gp.min_rooms = 4;
  gp.max_rooms = 4;
  const Floorplan fp = generate_floorplan(gp, mix_seed(seed, 11), "gradcheck-" + std::to_string(seed));
  FeatureConfig fc;
  fc.sets = AttributeSelection::parse("1,2,3");
  FeatureMatrix fm = assemble_features(fp, fc).matrix;
  apply_standardization(fm, compute_standardization({&fm}));

  ModelCheckFixture f;
  f.instance = make_generation_instance(fp.id, fm, build_graph(fp));
  f.model.k_iterations = 2;
  f.model.gat_hidden = 6;
  f.model.scoring_mlp_dims = {8, 4, 1};
  f.model.decoder_mlp_dims = {8, 4, 1};
  f.params = model::init_params(f.model, fm.f(), mix_seed(seed, 12));
  return f;
}

inline ScalarObjective model_objective(const ModelCheckFixture& f) {
  return [&f](ad::Tape& tape, const BoundParams& bound) {
    const model::ForwardVars fwd = model::forward(tape, f.instance, bound, f.model);
    return total_loss(fwd, f.instance, f.loss, loss_masks(f.instance, NegativePolicy::all_pairs, nullptr));
  };
}

/// Finite-difference check of the full forward pass plus loss.
inline GradCheckReport model_grad_check(std::uint64_t seed, const std::function<void(ParamSet&)>& corrupt = {}) {
  const ModelCheckFixture f = model_check_fixture(seed);
  GradCheckOptions opt;
  opt.corrupt_analytic = corrupt;
  return grad_check(model_objective(f), f.params, opt);
}

/// Worst error per parameter group, where a group is a tensor name minus its
/// last dotted component ("block0.score.door.w2" -> "block0.score.door").
inline std::map<std::string, double> group_errors(const GradCheckReport& r) {
  std::map<std::string, double> out;
  for (const auto& [name, err] : r.per_param) {
    const auto dot = name.rfind('.');
    const std::string group = dot == std::string::npos ? name : name.substr(0, dot);
    out[group] = std::max(out[group], err);
  }
  return out;
}

}  // namespace itl
