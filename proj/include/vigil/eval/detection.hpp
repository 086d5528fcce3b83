#pragma once

// Video-level detection metrics: F1, ROC AUC (Mann-Whitney with ties counted
// one half) and average precision (step-wise sweep over distinct scores).

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vigil/core/manifest.hpp"
#include "vigil/core/types.hpp"

namespace vigil::eval {

struct MetricError : Error {
  using Error::Error;
};

struct LabeledOutcome {
  std::string item_id;
  int label = 0;  // 1 positive, 0 negative
  double score = 0.0;
  bool predicted = false;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion confusion(std::span<const LabeledOutcome> outcomes) {
  Confusion c;
  for (const auto& o : outcomes) {
    if (o.label) {
      o.predicted ? ++c.tp : ++c.fn;
    } else {
      o.predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

// 0 when precision + recall = 0.
inline double f1(std::span<const LabeledOutcome> outcomes) {
  auto c = confusion(outcomes);
  double p = (c.tp + c.fp) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  double r = (c.tp + c.fn) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

namespace detail {

inline void require_both_classes(std::span<const LabeledOutcome> outcomes, const char* metric) {
  bool pos = false, neg = false;
  for (const auto& o : outcomes) (o.label ? pos : neg) = true;
  if (!pos || !neg) throw MetricError(std::string(metric) + " is undefined without both classes");
}

}  // namespace detail

// Rank-sum form: average ranks over tied scores, then
// (sum of positive ranks - P(P+1)/2) / (P N).
inline double auc(std::span<const LabeledOutcome> outcomes) {
  detail::require_both_classes(outcomes, "AUC");
  std::vector<std::pair<double, int>> v;
  v.reserve(outcomes.size());
  for (const auto& o : outcomes) v.emplace_back(o.score, o.label ? 1 : 0);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double pos_rank_sum = 0.0;
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (v[k].second) {
        pos_rank_sum += avg_rank;
        pos += 1.0;
      } else {
        neg += 1.0;
      }
    }
    i = j;
  }
  return (pos_rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

// sum_k (R_k - R_{k-1}) * P_k, thresholds at each distinct score, descending.
inline double average_precision(std::span<const LabeledOutcome> outcomes) {
  detail::require_both_classes(outcomes, "AP");
  std::vector<std::pair<double, int>> v;
  double total_pos = 0.0;
  for (const auto& o : outcomes) {
    v.emplace_back(o.score, o.label ? 1 : 0);
    total_pos += o.label ? 1.0 : 0.0;
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) {
      (v[j].second ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / total_pos;
    const double precision = tp / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

// One outcome per stream: predicted positive iff any Decision is anomalous,
// scored by the maximum Decision score (0 with no decisions). Labels come from
// StreamManifest::ground_truth().
inline std::vector<LabeledOutcome> video_outcomes(std::span<const Decision> decisions,
                                                  std::span<const StreamManifest> manifests) {
  std::map<std::string, LabeledOutcome> by_stream;
  for (const auto& m : manifests) by_stream[m.stream_id] = {m.stream_id, m.ground_truth(), 0.0, false};
  for (const auto& d : decisions) {
    auto it = by_stream.find(d.stream_id);
    if (it == by_stream.end()) throw MetricError("decision for unknown stream '" + d.stream_id + "'");
    it->second.score = std::max(it->second.score, d.score);
    it->second.predicted = it->second.predicted || d.is_anomalous;
  }
  std::vector<LabeledOutcome> out;
  for (auto& [id, o] : by_stream) out.push_back(std::move(o));
  return out;
}

}  // namespace vigil::eval
