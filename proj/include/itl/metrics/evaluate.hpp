#pragma once

#include <algorithm>
#include <array>
#include <exception>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "itl/metrics/ranking.hpp"
#include "itl/model/model.hpp"

namespace itl {

/// Relations in report order.
inline constexpr std::array<Relation, 3> kReportRelations{Relation::spatial, Relation::wall, Relation::door};

struct RelationMetrics {
  double auc = 0.0;
  double ap = 0.0;
  bool auc_defined = false;
  bool ap_defined = false;
  std::size_t pairs = 0;
  std::size_t positives = 0;
};

struct EvalReport {
  std::array<RelationMetrics, 3> pooled;  // indexed by kReportRelations order
  std::array<RelationMetrics, 3> macro;
  std::size_t graphs = 0;

  static std::size_t slot(Relation r) { return r == Relation::spatial ? 0 : r == Relation::wall ? 1 : 2; }
  const RelationMetrics& pooled_for(Relation r) const { return pooled[slot(r)]; }
  const RelationMetrics& macro_for(Relation r) const { return macro[slot(r)]; }
};

/// Scored pairs of one instance for one relation. Only `heldout` pairs are
/// scored: every i < j pair for generation, the fixed held-out set for
/// completion. `offset` makes tie-breaking indices unique across graphs.
inline std::vector<ScoredPair> scored_pairs(const TaskInstance& inst, const model::EdgePredictions& pred, Relation r,
                                            std::size_t offset = 0) {
  std::vector<ScoredPair> out;
  const Tensor& p = pred.channel(r);
  const Tensor& y = inst.target.channel(r);
  for (std::size_t k = 0; k < inst.heldout.size(); ++k) {
    const Pair& q = inst.heldout[k];
    out.push_back({offset + k, p(q.i, q.j), y(q.i, q.j) >= 0.5 ? 1 : 0});
  }
  return out;
}

inline RelationMetrics summarize(const std::vector<ScoredPair>& sp) {
  RelationMetrics m;
  m.pairs = sp.size();
  for (const auto& s : sp) m.positives += s.label != 0;
  if (m.positives > 0) {
    m.ap = average_precision(sp);
    m.ap_defined = true;
  }
  if (m.positives > 0 && m.positives < m.pairs) {
    m.auc = roc_auc(sp);
    m.auc_defined = true;
  }
  return m;
}

/// Pooled (all graphs' pairs ranked together) and macro (mean of per-graph
/// values, skipping graphs where a metric is undefined) metrics.
inline EvalReport evaluate_predictions(const std::vector<TaskInstance>& instances,
                                       const std::vector<model::EdgePredictions>& preds) {
  if (instances.size() != preds.size()) throw invalid_input("evaluate: instance / prediction count mismatch");
  EvalReport rep;
  rep.graphs = instances.size();
  for (Relation r : kReportRelations) {
    std::vector<ScoredPair> pooled;
    double auc_sum = 0.0, ap_sum = 0.0;
    std::size_t auc_n = 0, ap_n = 0;
    for (std::size_t g = 0; g < instances.size(); ++g) {
      auto sp = scored_pairs(instances[g], preds[g], r, pooled.size());
      const RelationMetrics m = summarize(sp);
      if (m.auc_defined) {
        auc_sum += m.auc;
        ++auc_n;
      }
      if (m.ap_defined) {
        ap_sum += m.ap;
        ++ap_n;
      }
      pooled.insert(pooled.end(), sp.begin(), sp.end());
    }
    RelationMetrics& pm = rep.pooled[EvalReport::slot(r)];
    pm = summarize(pooled);
    RelationMetrics& mm = rep.macro[EvalReport::slot(r)];
    mm.pairs = pm.pairs;
    mm.positives = pm.positives;
    mm.auc_defined = auc_n > 0;
    mm.ap_defined = ap_n > 0;
    mm.auc = auc_n > 0 ? auc_sum / static_cast<double>(auc_n) : 0.0;
    mm.ap = ap_n > 0 ? ap_sum / static_cast<double>(ap_n) : 0.0;
  }
  return rep;
}

/// Predicts every instance (spread over `threads` workers) and scores them.
inline EvalReport evaluate(const std::vector<TaskInstance>& instances, const ParamSet& params, const ItlConfig& cfg,
                           unsigned threads = 1) {
  std::vector<model::EdgePredictions> preds(instances.size());
  std::vector<std::exception_ptr> failures(instances.size());
  auto work = [&](std::size_t first, std::size_t step) {
    for (std::size_t g = first; g < instances.size(); g += step) {
      try {
        preds[g] = model::predict(instances[g], params, cfg);
      } catch (...) {
        failures[g] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(instances.size(), 1))));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return evaluate_predictions(instances, preds);
}

inline std::string format_metric(double v, bool defined, int precision = 6) {
  if (!defined) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

/// CSV with one row per (convention, relation).
inline std::string metrics_csv(const EvalReport& rep) {
  std::ostringstream os;
  os << "convention,relation,auc,ap,pairs,positives\n";
  for (const char* conv : {"pooled", "macro"}) {
    const auto& block = std::string(conv) == "pooled" ? rep.pooled : rep.macro;
    for (Relation r : kReportRelations) {
      const RelationMetrics& m = block[EvalReport::slot(r)];
      os << conv << ',' << relation_name(r) << ',' << format_metric(m.auc, m.auc_defined) << ','
         << format_metric(m.ap, m.ap_defined) << ',' << m.pairs << ',' << m.positives << '\n';
    }
  }
  return os.str();
}

/// Aligned text table in percent: an AUC block and an AP block, each over
/// Spatial / Wall / Door, one row per named report.
inline std::string metrics_table(const std::vector<std::pair<std::string, EvalReport>>& rows, bool pooled = true) {
  std::size_t w = 8;
  for (const auto& [name, rep] : rows) w = std::max(w, name.size() + 2);
  std::ostringstream os;
  auto cell = [&](const RelationMetrics& m, bool auc) {
    std::ostringstream c;
    if (auc ? m.auc_defined : m.ap_defined) c << std::fixed << std::setprecision(2) << 100.0 * (auc ? m.auc : m.ap);
    else c << "-";
    os << std::setw(9) << c.str();
  };
  os << std::left << std::setw(static_cast<int>(w)) << "" << std::right << std::setw(27) << "AUC" << "  |" << std::setw(27) << "AP"
     << "\n";
  os << std::left << std::setw(static_cast<int>(w)) << "method" << std::right;
  for (int b = 0; b < 2; ++b) {
    os << std::setw(9) << "Spatial" << std::setw(9) << "Wall" << std::setw(9) << "Door";
    if (b == 0) os << "  |";
  }
  os << "\n";
  for (const auto& [name, rep] : rows) {
    os << std::left << std::setw(static_cast<int>(w)) << name << std::right;
    const auto& block = pooled ? rep.pooled : rep.macro;
    for (const auto& m : block) cell(m, true);
    os << "  |";
    for (const auto& m : block) cell(m, false);
    os << "\n";
  }
  return os.str();
}

}  // namespace itl
