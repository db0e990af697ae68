#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "itl/diffcore/adam.hpp"
#include "itl/metrics/evaluate.hpp"
#include "itl/model/checkpoint.hpp"
#include "itl/synthgen/corpus.hpp"
#include "itl/training/loss.hpp"

namespace itl {

struct TrainConfig {
  double lr = 1e-4;
  std::vector<std::pair<int, double>> lr_drops{{60, 0.5}, {120, 0.5}};
  int max_epochs = 300;
  int early_stop_patience = 30;
  int batch = 1;
  std::uint64_t seed = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  unsigned eval_threads = 1;  // validation workers; does not change results

  void validate() const {
    if (!(lr > 0.0)) throw invalid_input("lr must be positive");
    if (max_epochs <= 0) throw invalid_input("max_epochs must be positive");
    if (early_stop_patience <= 0) throw invalid_input("early_stop_patience must be positive");
    if (batch <= 0) throw invalid_input("batch must be positive");
    for (std::size_t k = 0; k < lr_drops.size(); ++k) {
      if (k > 0 && lr_drops[k].first <= lr_drops[k - 1].first) throw invalid_input("lr_drops epochs must be strictly increasing");
      if (!(lr_drops[k].second > 0.0)) throw invalid_input("lr_drops factors must be positive");
    }
  }
  bool operator==(const TrainConfig&) const = default;
};

/// Learning rate for 1-based `epoch`: each drop applies from its epoch on.
inline double lr_at(const TrainConfig& cfg, int epoch) {
  double lr = cfg.lr;
  for (const auto& [e, factor] : cfg.lr_drops)
    if (epoch >= e) lr *= factor;
  return lr;
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  EvalReport val;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_spatial_auc = 0.0;
  bool stopped_early = false;
};

struct TrainResult {
  Checkpoint checkpoint;
  TrainHistory history;
};

// ------------------------------------------------------------------- data prep

/// Distance-column statistics over the training split for the given sets.
inline StandardizationStats training_stats(const std::vector<CorpusRecord>& train, const AttributeSelection& sets) {
  std::vector<FeatureMatrix> selected;
  selected.reserve(train.size());
  for (const CorpusRecord& r : train) selected.push_back(select_sets(r.features, sets));
  std::vector<const FeatureMatrix*> ptrs;
  for (const auto& m : selected) ptrs.push_back(&m);
  return compute_standardization(ptrs);
}

/// Task instances for one split. Completion needs two spatial edges; graphs
/// with fewer are skipped and counted in `skipped`.
inline std::vector<TaskInstance> make_instances(const std::vector<CorpusRecord>& records, TaskKind task,
                                                const AttributeSelection& sets, const StandardizationStats& stats,
                                                double observe_fraction, std::uint64_t seed, std::size_t* skipped = nullptr) {
  std::vector<TaskInstance> out;
  out.reserve(records.size());
  for (const CorpusRecord& r : records) {
    FeatureMatrix fm = select_sets(r.features, sets);
    apply_standardization(fm, stats);
    if (task == TaskKind::generation) {
      out.push_back(make_generation_instance(r.floorplan.id, fm, r.graph));
    } else if (r.graph.edges(Relation::spatial).size() >= 2) {
      out.push_back(make_completion_instance(r.floorplan.id, fm, r.graph, observe_fraction, seed));
    } else if (skipped != nullptr) {
      ++*skipped;
    }
  }
  return out;
}

// ---------------------------------------------------------------- training loop

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam over single graphs (or accumulated batches) with step decays, early
/// stopping on pooled validation spatial AUC and best-epoch parameters kept.
/// Fully deterministic given `train_cfg.seed`.
inline TrainResult train(const std::vector<TaskInstance>& train_set, const std::vector<TaskInstance>& val_set,
                         const ItlConfig& model_cfg, const LossConfig& loss_cfg, const TrainConfig& train_cfg,
                         const StandardizationStats& stats, const EpochCallback& on_epoch = {}) {
  model_cfg.validate();
  loss_cfg.validate();
  train_cfg.validate();
  if (train_set.empty() || val_set.empty()) throw invalid_input("train: training and validation splits must be non-empty");
  const std::size_t F = train_set.front().features.f();
  for (const auto* split : {&train_set, &val_set})
    for (const TaskInstance& t : *split)
      if (t.features.f() != F) throw Error(ErrorKind::incompatible, "train: instances disagree on feature width");

  TrainResult res;
  res.checkpoint.config = model_cfg;
  res.checkpoint.feature_layout = train_set.front().features.layout;
  res.checkpoint.standardization = stats;
  ParamSet params = model::init_params(model_cfg, F, mix_seed(train_cfg.seed, 1));
  ParamSet best = params;
  AdamState adam = AdamState::zeros_like(params);
  Rng order_rng(mix_seed(train_cfg.seed, 2));
  Rng sample_rng(mix_seed(train_cfg.seed, 3));
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double best_auc = -1.0;
  int since_best = 0;
  for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    AdamHyper hyper{lr_at(train_cfg, epoch), train_cfg.beta1, train_cfg.beta2, train_cfg.eps};
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(train_cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(train_cfg.batch));
      ParamSet grads;
      for (std::size_t b = start; b < stop; ++b) {
        const TaskInstance& inst = train_set[order[b]];
        ad::Tape tape;
        const BoundParams bound = bind_params(tape, params);
        const model::ForwardVars fwd = model::forward(tape, inst, bound, model_cfg);
        const ad::Var loss = total_loss(fwd, inst, loss_cfg, loss_masks(inst, loss_cfg.negative_policy, &sample_rng));
        const double lv = loss.value()[0];
        if (!std::isfinite(lv)) {
          throw Error(ErrorKind::divergence, "non-finite training loss in epoch " + std::to_string(epoch) +
                                                 "; last finite epoch " + std::to_string(epoch - 1));
        }
        loss_sum += lv;
        tape.backward(loss);
        ParamSet g = collect_grads(tape, bound);
        if (grads.empty()) {
          grads = std::move(g);
        } else {
          for (auto& [name, t] : grads)
            for (std::size_t i = 0; i < t.size(); ++i) t[i] += g.at(name)[i];
        }
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (auto& [name, t] : grads) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] *= inv;
        if (!t.all_finite()) {
          throw Error(ErrorKind::divergence, "non-finite gradient for '" + name + "' in epoch " + std::to_string(epoch) +
                                                 "; last finite epoch " + std::to_string(epoch - 1));
        }
      }
      adam_step(params, grads, adam, hyper);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = hyper.lr;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.val = evaluate(val_set, params, model_cfg, train_cfg.eval_threads);
    res.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const RelationMetrics& spatial = rec.val.pooled_for(Relation::spatial);
    const double auc = spatial.auc_defined ? spatial.auc : 0.0;
    if (auc > best_auc) {
      best_auc = auc;
      best = params;
      res.history.best_epoch = epoch;
      res.history.best_val_spatial_auc = auc;
      since_best = 0;
    } else if (++since_best >= train_cfg.early_stop_patience) {
      res.history.stopped_early = true;
      break;
    }
  }
  res.checkpoint.params = std::move(best);
  return res;
}

// ---------------------------------------------------------------- serialization

inline Json to_json(const TrainConfig& c) {
  Json drops = Json::array();
  for (const auto& [e, f] : c.lr_drops) drops.push_back({e, f});
  return Json{{"lr", c.lr},       {"lr_drops", drops}, {"max_epochs", c.max_epochs}, {"early_stop_patience", c.early_stop_patience},
              {"batch", c.batch}, {"seed", c.seed},    {"beta1", c.beta1},           {"beta2", c.beta2},
              {"eps", c.eps}};
}

inline Json to_json(const LossConfig& c) {
  return Json{{"lambda1", c.lambda1},
              {"lambda2", c.lambda2},
              {"negative_policy", negative_policy_name(c.negative_policy)},
              {"per_iteration_weight", c.per_iteration_weight}};
}

inline Json to_json(const EvalReport& r) {
  Json out = Json::object();
  for (const char* conv : {"pooled", "macro"}) {
    Json block = Json::object();
    for (Relation rel : kReportRelations) {
      const RelationMetrics& m = std::string(conv) == "pooled" ? r.pooled_for(rel) : r.macro_for(rel);
      block[relation_name(rel)] = Json{{"auc", m.auc_defined ? Json(m.auc) : Json(nullptr)},
                                       {"ap", m.ap_defined ? Json(m.ap) : Json(nullptr)}};
    }
    out[conv] = block;
  }
  return out;
}

inline Json to_json(const TrainHistory& h) {
  Json epochs = Json::array();
  for (const EpochRecord& e : h.epochs) {
    epochs.push_back(Json{{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss}, {"val", to_json(e.val)}});
  }
  return Json{{"best_epoch", h.best_epoch},
              {"best_val_spatial_auc", h.best_val_spatial_auc},
              {"stopped_early", h.stopped_early},
              {"epochs", std::move(epochs)}};
}

}  // namespace itl
