#pragma once

#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "itl/training/train.hpp"

namespace itl {

/// One cell of an experiment grid.
struct ExperimentSpec {
  std::string id;
  TaskKind task = TaskKind::generation;
  ItlConfig model;
  std::string sets = "1,2,3";
  double observe_frac = 0.0;
  LossConfig loss;
};

struct GridSpec {
  std::string name;
  std::vector<ExperimentSpec> experiments;
  TrainConfig train;
};

struct ResultRow {
  std::string experiment_id;
  std::string task;
  std::string variant;
  int k = 0;
  std::string sets;
  double observe_frac = 0.0;
  Relation relation = Relation::spatial;
  double auc = 0.0;
  double ap = 0.0;
  bool auc_defined = false;
  bool ap_defined = false;
  std::uint64_t seed = 0;
};

struct ExperimentOutcome {
  ExperimentSpec spec;
  EvalReport test;
  TrainHistory history;
  Checkpoint checkpoint;
};

struct GridResult {
  std::vector<ResultRow> rows;
  std::vector<ExperimentOutcome> outcomes;

  /// Pooled test metrics of one experiment and relation.
  const ResultRow& row(const std::string& id, Relation r) const {
    for (const ResultRow& x : rows)
      if (x.experiment_id == id && x.relation == r) return x;
    throw invalid_input("no result for experiment '" + id + "'");
  }
};

namespace grid_detail {

inline ExperimentSpec make(const std::string& id, Variant v, int k = 2) {
  ExperimentSpec e;
  e.id = id;
  e.model.variant = v;
  e.model.k_iterations = k;
  return e;
}

inline std::string fixed(double v, int p) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(p) << v;
  return os.str();
}

}  // namespace grid_detail

inline const std::vector<std::string>& grid_preset_names() {
  static const std::vector<std::string> names{"table2",    "ablation",  "iterations", "attributes", "completion",
                                              "sharing",   "long_skip", "sensitivity", "acceptance"};
  return names;
}

/// Named grids mirroring the reported experiments. "acceptance" is the union
/// needed by the acceptance checks.
inline GridSpec grid_preset(const std::string& name) {
  using grid_detail::make;
  GridSpec g;
  g.name = name;
  auto& ex = g.experiments;
  if (name == "table2") {
    ex = {make("itl", Variant::full), make("mlp", Variant::mlp), make("gat_knn", Variant::gat_knn)};
  } else if (name == "ablation") {
    ex = {make("itl", Variant::full), make("no_il", Variant::no_il), make("no_mr_gat", Variant::no_mr_gat),
          make("no_mr_decoder", Variant::no_mr_decoder)};
  } else if (name == "iterations") {
    for (int k = 0; k <= 4; ++k) ex.push_back(make("k" + std::to_string(k), Variant::full, k));
  } else if (name == "attributes") {
    for (const char* s : {"1", "2", "3", "4", "1,2", "1,3", "1,2,3", "1,2,3,4"}) {
      ExperimentSpec e = make("sets_" + std::string(s), Variant::full);
      e.sets = s;
      for (char& c : e.id)
        if (c == ',') c = '_';
      ex.push_back(e);
    }
  } else if (name == "completion") {
    for (double f : {0.2, 0.4, 0.6, 0.8}) {
      ExperimentSpec e = make("complete_" + grid_detail::fixed(f, 1), Variant::full);
      e.task = TaskKind::completion;
      e.observe_frac = f;
      ex.push_back(e);
    }
  } else if (name == "sharing") {
    ex = {make("unshared", Variant::full), make("shared", Variant::full)};
    ex[1].model.share_block_weights = true;
  } else if (name == "long_skip") {
    ex = {make("long_skip", Variant::full), make("no_long_skip", Variant::full)};
    ex[1].model.long_skip = false;
  } else if (name == "sensitivity") {
    for (double l1 : {0.25, 0.5, 1.0, 2.0})
      for (double l2 : {0.25, 0.5, 1.0, 2.0}) {
        ExperimentSpec e = make("l1_" + grid_detail::fixed(l1, 2) + "_l2_" + grid_detail::fixed(l2, 2), Variant::full);
        e.loss.lambda1 = l1;
        e.loss.lambda2 = l2;
        ex.push_back(e);
      }
  } else if (name == "acceptance") {
    ex = {make("itl", Variant::full),         make("mlp", Variant::mlp),
          make("gat_knn", Variant::gat_knn),  make("no_il", Variant::no_il),
          make("no_mr_gat", Variant::no_mr_gat), make("no_mr_decoder", Variant::no_mr_decoder),
          make("k1", Variant::full, 1),       make("k3", Variant::full, 3),
          make("k4", Variant::full, 4)};
    for (double f : {0.2, 0.8}) {
      ExperimentSpec e = make("complete_" + grid_detail::fixed(f, 1), Variant::full);
      e.task = TaskKind::completion;
      e.observe_frac = f;
      ex.push_back(e);
    }
  } else {
    std::string known;
    for (const auto& n : grid_preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw invalid_input("unknown grid preset '" + name + "' (known: " + known + ")");
  }
  return g;
}

/// Canonical description of what a run computes; cells with equal keys share
/// one training run.
inline std::string experiment_key(const ExperimentSpec& e, const TrainConfig& t) {
  ItlConfig m = e.model;
  if (m.effective_k() == 0 && (m.variant == Variant::full || m.variant == Variant::no_il || m.variant == Variant::no_mr_gat)) {
    m.variant = Variant::no_il;
  }
  if (m.effective_k() == 0) {
    m.k_iterations = 0;
    m.share_block_weights = false;
  }
  m.long_skip = m.use_long_skip();
  return Json{{"task", task_name(e.task)},  {"model", to_json(m)},   {"sets", AttributeSelection::parse(e.sets).to_string()},
              {"observe", e.observe_frac}, {"loss", to_json(e.loss)}, {"train", to_json(t)}}
      .dump();
}

using GridProgress = std::function<void(const std::string& experiment_id, const EpochRecord&)>;

/// Trains and tests every cell on `corpus`. Instances are built once per
/// (task, sets, observe fraction); identical cells reuse one run.
inline GridResult run_experiment_grid(const Corpus& corpus, const GridSpec& grid, const GridProgress& progress = {}) {
  struct Prepared {
    std::vector<TaskInstance> train, val, test;
    StandardizationStats stats;
  };
  std::map<std::string, Prepared> prepared;
  std::map<std::string, std::size_t> done;  // key -> index into outcomes
  GridResult out;
  for (const ExperimentSpec& spec : grid.experiments) {
    const std::string key = experiment_key(spec, grid.train);
    const ExperimentOutcome* outcome = nullptr;
    if (auto it = done.find(key); it != done.end()) {
      ExperimentOutcome copy = out.outcomes[it->second];
      copy.spec = spec;
      out.outcomes.push_back(std::move(copy));
      outcome = &out.outcomes.back();
    } else {
      const AttributeSelection sets = AttributeSelection::parse(spec.sets);
      const std::string data_key = std::string(task_name(spec.task)) + "|" + sets.to_string() + "|" + grid_detail::fixed(spec.observe_frac, 6);
      auto pit = prepared.find(data_key);
      if (pit == prepared.end()) {
        Prepared p;
        p.stats = training_stats(corpus.train, sets);
        const std::uint64_t split_seed = mix_seed(grid.train.seed, 0x5eed);
        p.train = make_instances(corpus.train, spec.task, sets, p.stats, spec.observe_frac, split_seed);
        p.val = make_instances(corpus.val, spec.task, sets, p.stats, spec.observe_frac, split_seed);
        p.test = make_instances(corpus.test, spec.task, sets, p.stats, spec.observe_frac, split_seed);
        pit = prepared.emplace(data_key, std::move(p)).first;
      }
      const Prepared& p = pit->second;
      EpochCallback cb;
      if (progress) cb = [&](const EpochRecord& r) { progress(spec.id, r); };
      TrainResult tr = train(p.train, p.val, spec.model, spec.loss, grid.train, p.stats, cb);
      ExperimentOutcome o{spec, evaluate(p.test, tr.checkpoint.params, spec.model), std::move(tr.history), std::move(tr.checkpoint)};
      done.emplace(key, out.outcomes.size());
      out.outcomes.push_back(std::move(o));
      outcome = &out.outcomes.back();
    }
    for (Relation r : kReportRelations) {
      const RelationMetrics& m = outcome->test.pooled_for(r);
      out.rows.push_back({spec.id, task_name(spec.task), variant_name(spec.model.variant), spec.model.effective_k(),
                          AttributeSelection::parse(spec.sets).to_string(), spec.observe_frac, r, m.auc, m.ap,
                          m.auc_defined, m.ap_defined, grid.train.seed});
    }
  }
  return out;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "experiment_id,task,variant,K,sets,observe_frac,relation,auc,ap,seed\n";
  for (const ResultRow& r : rows) {
    os << r.experiment_id << ',' << r.task << ',' << r.variant << ',' << r.k << ",\"" << r.sets << "\","
       << grid_detail::fixed(r.observe_frac, 2) << ',' << relation_name(r.relation) << ','
       << format_metric(r.auc, r.auc_defined) << ',' << format_metric(r.ap, r.ap_defined) << ',' << r.seed << '\n';
  }
  return os.str();
}

/// Text table of pooled test metrics, one row per experiment.
inline std::string grid_table(const GridResult& g) {
  std::vector<std::pair<std::string, EvalReport>> rows;
  for (const ExperimentOutcome& o : g.outcomes) rows.emplace_back(o.spec.id, o.test);
  return metrics_table(rows);
}

}  // namespace itl
