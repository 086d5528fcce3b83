#pragma once

// Timing report for a virtual-clock run. All stamps are stream time, so the
// report is a pure function of config, manifest and seed.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/eval/latency.hpp"
#include "vigil/pipeline/config.hpp"
#include "vigil/pipeline/run_types.hpp"

namespace vigil {

// "<backend>=<seconds>", "<backend>=fixed:<s>" or "<backend>=uniform:<lo>:<hi>".
inline void apply_latency_override(PipelineConfig& cfg, std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) throw ConfigError({"--latency: expected backend=spec, got '" + std::string(spec) + "'"});
  const std::string name(spec.substr(0, eq));
  std::string value(spec.substr(eq + 1));
  BackendSpec* b = name == "captioner"    ? &cfg.captioner
                   : name == "summarizer" ? &cfg.summarizer
                   : name == "reasoner"   ? &cfg.reasoner
                                          : nullptr;
  if (!b) throw ConfigError({"--latency: unknown backend '" + name + "'"});

  std::vector<double> nums;
  std::string kind = "fixed";
  try {
    std::size_t pos = 0;
    if (value.rfind("fixed:", 0) == 0) {
      pos = 6;
    } else if (value.rfind("uniform:", 0) == 0) {
      kind = "uniform";
      pos = 8;
    }
    while (pos <= value.size()) {
      auto next = value.find(':', pos);
      if (next == std::string::npos) next = value.size();
      std::size_t used = 0;
      const std::string part = value.substr(pos, next - pos);
      nums.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
      pos = next + 1;
    }
  } catch (const std::exception&) {
    throw ConfigError({"--latency." + name + ": cannot parse '" + value + "'"});
  }
  try {
    if (kind == "fixed" && nums.size() == 1) {
      b->latency = LatencyModel::fixed(from_seconds(nums[0]));
    } else if (kind == "uniform" && nums.size() == 2) {
      b->latency = LatencyModel::uniform(from_seconds(nums[0]), from_seconds(nums[1]));
    } else {
      throw std::invalid_argument("wrong number of values");
    }
    b->latency.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError({"--latency." + name + ": " + e.what()});
  }
}

struct DecisionTimingRow {
  std::int64_t decision_id = -1;
  std::int64_t summary_seq = kNoSummary;
  Timestamp emitted_ts{0};
  bool is_anomalous = false;
  // Only for decisions driven by a summary.
  std::optional<Duration> end_to_end;  // emitted - close of the source window
  std::optional<Duration> injected;    // caption + summary + reasoner service time
  std::optional<Duration> overhead;    // end_to_end - injected (queueing)
};

struct StageStats {
  std::size_t calls = 0;
  Duration total{0};
  Duration max{0};

  void add(Duration d) {
    ++calls;
    total += d;
    max = std::max(max, d);
  }
  double mean_s() const { return calls ? to_seconds(Duration{total.count() / static_cast<std::int64_t>(calls)}) : 0.0; }
};

struct SimReport {
  std::string stream_id;
  RunCounts counts;
  StageStats captioner, summarizer, reasoner;
  std::vector<DecisionTimingRow> decisions;
  std::optional<eval::LatencyRecord> detection;
};

inline SimReport build_sim_report(const RunResult& r, const StreamManifest& m) {
  SimReport rep;
  rep.stream_id = m.stream_id;
  rep.counts = r.counts;
  // Windows are processed in order, so the first `batches` were captioned and
  // the first `summaries` summarized.
  for (std::size_t i = 0; i < r.windows.size(); ++i) {
    const auto& w = r.windows[i];
    if (i < r.counts.batches) rep.captioner.add(w.caption_done - w.caption_start);
    if (i < r.counts.summaries) rep.summarizer.add(w.summary_done - w.summary_start);
  }
  for (const auto& d : r.discriminations) rep.reasoner.add(d.done - d.start);

  for (const auto& t : r.discriminations) {
    if (t.decision_id < 0) continue;
    const Decision* dec = nullptr;
    for (const auto& d : r.decisions) {
      if (d.decision_id == t.decision_id) dec = &d;
    }
    if (!dec) continue;  // dropped from Q3
    DecisionTimingRow row{t.decision_id, t.summary_seq, dec->emitted_ts, dec->is_anomalous, {}, {}, {}};
    if (t.summary_seq >= 0 && static_cast<std::size_t>(t.summary_seq) < r.windows.size()) {
      const auto& w = r.windows[static_cast<std::size_t>(t.summary_seq)];
      row.end_to_end = dec->emitted_ts - w.closed_ts;
      row.injected = (w.caption_done - w.caption_start) + (w.summary_done - w.summary_start) + (t.done - t.start);
      row.overhead = *row.end_to_end - *row.injected;
    }
    rep.decisions.push_back(row);
  }
  if (m.marker(kAnomalyOnset) || m.marker(kCrimeOnset)) rep.detection = eval::detection_latency(r.decisions, m);
  return rep;
}

inline json to_json_value(const SimReport& r) {
  auto stage = [](const StageStats& s) {
    return json{{"calls", s.calls}, {"mean_s", s.mean_s()}, {"max_s", to_seconds(s.max)}, {"total_s", to_seconds(s.total)}};
  };
  auto opt = [](const std::optional<Duration>& d) { return d ? json(to_seconds(*d)) : json(nullptr); };
  json decisions = json::array();
  for (const auto& d : r.decisions) {
    decisions.push_back({{"decision_id", d.decision_id},
                         {"summary_seq", d.summary_seq},
                         {"emitted_ts", to_seconds(d.emitted_ts)},
                         {"is_anomalous", d.is_anomalous},
                         {"end_to_end_s", opt(d.end_to_end)},
                         {"injected_s", opt(d.injected)},
                         {"overhead_s", opt(d.overhead)}});
  }
  json j{{"stream_id", r.stream_id},
         {"counts", r.counts},
         {"stages", {{"captioner", stage(r.captioner)}, {"summarizer", stage(r.summarizer)}, {"reasoner", stage(r.reasoner)}}},
         {"decisions", decisions}};
  if (r.detection) {
    const auto& l = *r.detection;
    j["detection"] = {{"onset_ts", to_seconds(l.onset_ts)},
                      {"first_positive_ts", l.first_positive_ts ? json(to_seconds(*l.first_positive_ts)) : json(nullptr)},
                      {"latency_s", l.latency_s() ? json(*l.latency_s()) : json(nullptr)},
                      {"missed", l.missed()},
                      {"false_positives", l.false_positives}};
  } else {
    j["detection"] = nullptr;
  }
  return j;
}

}  // namespace vigil
