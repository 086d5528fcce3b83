#pragma once

// Assembles detection, text and latency metrics from a Decision log.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vigil/core/json_io.hpp"
#include "vigil/eval/detection.hpp"
#include "vigil/eval/latency.hpp"
#include "vigil/eval/text.hpp"

namespace vigil::eval {

inline constexpr const char* kMeteorNote = "METEOR uses exact-match alignment only (no stemming or synonyms)";

struct DetectionMetrics {
  std::size_t items = 0;
  double f1 = 0.0;
  std::optional<double> auc;  // empty when only one class is present
  std::optional<double> ap;
};

struct TextMetrics {
  std::size_t pairs = 0;
  double bleu = 0.0;
  double cider = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
};

struct MetricReport {
  std::optional<DetectionMetrics> detection;
  std::optional<TextMetrics> text;
  std::vector<LatencyRecord> latency;
  std::vector<std::string> notes;

  std::optional<double> mean_latency_s() const {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& r : latency) {
      if (auto l = r.latency_s()) {
        acc += *l;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return acc / static_cast<double>(n);
  }
};

// Reads Decision JSONL; blank lines are skipped, anything else must parse.
inline std::vector<Decision> read_decisions(std::istream& in) {
  std::vector<Decision> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<Decision>());
    } catch (const std::exception& e) {
      throw SchemaError("decisions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Decision> load_decisions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot open decisions file " + path.string());
  return read_decisions(in);
}

// item_id -> reference strings. A bare string value counts as one reference.
using References = std::map<std::string, std::vector<std::string>>;

inline References parse_references(const json& j) {
  if (!j.is_object()) throw SchemaError("references: expected an object of item_id -> strings");
  References out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      out[k] = {v.get<std::string>()};
    } else if (v.is_array() && !v.empty()) {
      for (const auto& s : v) {
        if (!s.is_string()) throw SchemaError("references." + k + ": expected strings");
        out[k].push_back(s.get<std::string>());
      }
    } else {
      throw SchemaError("references." + k + ": expected a string or a non-empty array of strings");
    }
  }
  return out;
}

inline References load_references(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot open references file " + path.string());
  return parse_references(json::parse(in));
}

// Candidate text of a stream: "subject location cause" of its highest-scoring
// Decision, earliest on ties.
inline std::optional<std::string> candidate_text(std::span<const Decision> decisions, const std::string& stream_id) {
  const Decision* best = nullptr;
  for (const auto& d : decisions) {
    if (d.stream_id != stream_id) continue;
    if (!best || d.score > best->score || (d.score == best->score && d.emitted_ts < best->emitted_ts)) best = &d;
  }
  if (!best) return std::nullopt;
  return best->subject + " " + best->location + " " + best->cause;
}

struct ReportOptions {
  BleuOptions bleu;
  CiderOptions cider;
};

inline MetricReport build_report(std::span<const Decision> decisions, std::span<const StreamManifest> manifests,
                                 const References* references = nullptr, const ReportOptions& opt = {}) {
  MetricReport rep;
  rep.notes.push_back(kMeteorNote);

  if (!manifests.empty()) {
    auto outcomes = video_outcomes(decisions, manifests);
    DetectionMetrics dm{outcomes.size(), f1(outcomes), std::nullopt, std::nullopt};
    try {
      dm.auc = auc(outcomes);
      dm.ap = average_precision(outcomes);
    } catch (const MetricError& e) {
      rep.notes.push_back(e.what());
    }
    rep.detection = dm;
    for (const auto& m : manifests) {
      if (m.marker(kAnomalyOnset) || m.marker(kCrimeOnset)) rep.latency.push_back(detection_latency(decisions, m));
    }
  }

  if (references && !references->empty()) {
    std::vector<TextPair> pairs;
    for (const auto& [item, refs] : *references) {
      auto cand = candidate_text(decisions, item);
      if (!cand) {
        rep.notes.push_back("no decision for reference item '" + item + "'; scored as empty candidate");
        cand = "";
      }
      pairs.push_back(make_pair(item, *cand, refs));
    }
    rep.text = TextMetrics{pairs.size(), bleu_cumulative(pairs, opt.bleu), cider(pairs, opt.cider),
                           mean_over(pairs, [](const TextPair& p) { return rouge_l(p); }),
                           mean_over(pairs, [](const TextPair& p) { return meteor_basic(p); })};
  }
  return rep;
}

inline json to_json_value(const MetricReport& r) {
  json j = json::object();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  if (r.detection) {
    j["detection"] = {{"items", r.detection->items},
                      {"f1", r.detection->f1},
                      {"auc", opt(r.detection->auc)},
                      {"ap", opt(r.detection->ap)}};
  }
  if (r.text) {
    j["text"] = {{"pairs", r.text->pairs},       {"bleu", r.text->bleu},     {"cider", r.text->cider},
                 {"rouge_l", r.text->rouge_l}, {"meteor", r.text->meteor}};
  }
  json lat = json::array();
  for (const auto& l : r.latency) {
    lat.push_back({{"stream_id", l.stream_id},
                   {"onset_ts", to_seconds(l.onset_ts)},
                   {"first_positive_ts", l.first_positive_ts ? json(to_seconds(*l.first_positive_ts)) : json(nullptr)},
                   {"latency_s", opt(l.latency_s())},
                   {"missed", l.missed()},
                   {"false_positives", l.false_positives}});
  }
  j["latency"] = lat;
  j["mean_latency_s"] = opt(r.mean_latency_s());
  j["notes"] = r.notes;
  return j;
}

namespace detail {

inline std::string fmt(std::optional<double> v, int prec = 3) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, *v);
  return buf;
}

inline void table(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w;
  for (const auto& r : rows) {
    w.resize(std::max(w.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += "  ";
      line += r[i] + std::string(w[i] - r[i].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
}

}  // namespace detail

inline std::string to_table(const MetricReport& r) {
  std::ostringstream os;
  os << "# " << kMeteorNote << '\n';
  if (r.detection) {
    os << "\nDetection (video level)\n";
    detail::table(os, {{"Items", "F1", "AUC", "AP"},
                       {std::to_string(r.detection->items), detail::fmt(r.detection->f1), detail::fmt(r.detection->auc),
                        detail::fmt(r.detection->ap)}});
  }
  if (r.text) {
    os << "\nText\n";
    detail::table(os, {{"Pairs", "BLEU", "CIDEr", "ROUGE-L", "METEOR"},
                       {std::to_string(r.text->pairs), detail::fmt(r.text->bleu), detail::fmt(r.text->cider),
                        detail::fmt(r.text->rouge_l), detail::fmt(r.text->meteor)}});
  }
  if (!r.latency.empty()) {
    os << "\nLatency (s)\n";
    std::vector<std::vector<std::string>> rows{{"Stream", "Onset", "First positive", "Latency", "FP before onset"}};
    for (const auto& l : r.latency) {
      rows.push_back({l.stream_id, detail::fmt(to_seconds(l.onset_ts), 2),
                      l.first_positive_ts ? detail::fmt(to_seconds(*l.first_positive_ts), 2) : "missed",
                      detail::fmt(l.latency_s(), 2), std::to_string(l.false_positives)});
    }
    rows.push_back({"mean", "", "", detail::fmt(r.mean_latency_s(), 2), ""});
    detail::table(os, rows);
  }
  for (std::size_t i = 1; i < r.notes.size(); ++i) os << "\nnote: " << r.notes[i];
  if (r.notes.size() > 1) os << '\n';
  return os.str();
}

}  // namespace vigil::eval
