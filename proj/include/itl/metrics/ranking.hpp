#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "itl/error.hpp"

namespace itl {

/// One scored candidate edge. `index` orders ties deterministically.
struct ScoredPair {
  std::size_t index = 0;
  double score = 0.0;
  int label = 0;
};

/// Mann-Whitney AUC: P(s+ > s-) + P(s+ = s-) / 2, computed from exact
/// integer counts.
inline double roc_auc(const std::vector<ScoredPair>& sp) {
  std::vector<ScoredPair> s = sp;
  std::sort(s.begin(), s.end(), [](const ScoredPair& a, const ScoredPair& b) { return a.score < b.score; });
  std::uint64_t pos = 0, neg = 0;
  for (const auto& p : s) (p.label != 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw invalid_input("roc_auc needs at least one positive and one negative");
  // Twice the number of (positive, negative) wins, ties counting one.
  std::uint64_t twice_wins = 0, neg_below = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    std::uint64_t gp = 0, gn = 0;
    while (j < s.size() && s[j].score == s[i].score) {
      (s[j].label != 0 ? gp : gn) += 1;
      ++j;
    }
    twice_wins += 2 * gp * neg_below + gp * gn;
    neg_below += gn;
    i = j;
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

/// Step-wise average precision over the descending ranking, ties broken by
/// ascending index: sum_k (R_k - R_{k-1}) P_k.
inline double average_precision(const std::vector<ScoredPair>& sp) {
  std::vector<ScoredPair> s = sp;
  std::sort(s.begin(), s.end(), [](const ScoredPair& a, const ScoredPair& b) {
    return a.score != b.score ? a.score > b.score : a.index < b.index;
  });
  std::size_t pos = 0;
  for (const auto& p : s) pos += p.label != 0;
  if (pos == 0) throw invalid_input("average_precision needs at least one positive");
  const double P = static_cast<double>(pos);
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k].label == 0) continue;
    ++tp;
    const double recall = static_cast<double>(tp) / P;
    const double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace itl
