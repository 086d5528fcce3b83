#pragma once

#include <optional>
#include <span>
#include <string>

#include "vigil/core/manifest.hpp"
#include "vigil/eval/detection.hpp"

namespace vigil::eval {

struct LatencyRecord {
  std::string stream_id;
  Timestamp onset_ts{0};
  std::optional<Timestamp> first_positive_ts;  // empty: missed
  std::size_t false_positives = 0;             // positives emitted before the onset

  bool missed() const { return !first_positive_ts.has_value(); }
  std::optional<double> latency_s() const {
    if (!first_positive_ts) return std::nullopt;
    return to_seconds(*first_positive_ts - onset_ts);
  }
};

// The onset is the anomaly_onset marker, or crime_onset when that is the only
// one present.
inline Timestamp onset_of(const StreamManifest& m) {
  if (auto t = m.marker(kAnomalyOnset)) return *t;
  if (auto t = m.marker(kCrimeOnset)) return *t;
  throw MetricError("stream '" + m.stream_id + "' has no " + kAnomalyOnset + " marker");
}

// Decisions for other streams are ignored. Order of `decisions` does not matter.
inline LatencyRecord detection_latency(std::span<const Decision> decisions, const StreamManifest& m) {
  LatencyRecord r{m.stream_id, onset_of(m), std::nullopt, 0};
  for (const auto& d : decisions) {
    if (d.stream_id != m.stream_id || !d.is_anomalous) continue;
    if (d.emitted_ts < r.onset_ts) {
      ++r.false_positives;
    } else if (!r.first_positive_ts || d.emitted_ts < *r.first_positive_ts) {
      r.first_positive_ts = d.emitted_ts;
    }
  }
  return r;
}

}  // namespace vigil::eval
