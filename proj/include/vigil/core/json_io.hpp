#pragma once

// Canonical JSON forms of the domain types. nlohmann::json keeps object keys
// sorted, so dump() of these values is byte-stable.

#include <string>

#include "json.hpp"
#include "vigil/core/types.hpp"

namespace vigil {

using json = nlohmann::json;

inline constexpr int kDecisionSchemaVersion = 1;

struct SchemaError : Error {
  using Error::Error;
};

namespace detail {

template <class T>
T require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

inline void require_object(const json& j, const char* where) {
  if (!j.is_object()) throw SchemaError(std::string(where) + ": expected a JSON object");
}

}  // namespace detail

inline void to_json(json& j, const FrameRef& f) {
  j = json{{"frame_id", f.frame_id}, {"ts_us", f.ts.count()}, {"payload", f.payload},
           {"stream_id", f.stream_id}};
}

inline void from_json(const json& j, FrameRef& f) {
  detail::require_object(j, "frame");
  f.frame_id = detail::require<FrameId>(j, "frame_id", "frame");
  f.ts = Timestamp{detail::require<std::int64_t>(j, "ts_us", "frame")};
  f.payload = detail::require<std::string>(j, "payload", "frame");
  f.stream_id = detail::require<std::string>(j, "stream_id", "frame");
}

inline void to_json(json& j, const Caption& c) {
  j = json{{"text", c.text},
           {"frame_id", c.frame_id},
           {"ts_us", c.ts.count()},
           {"window_seq", c.window_seq},
           {"entities", c.entities}};
}

inline void from_json(const json& j, Caption& c) {
  detail::require_object(j, "caption");
  c.text = detail::require<std::string>(j, "text", "caption");
  c.frame_id = detail::require<FrameId>(j, "frame_id", "caption");
  c.ts = Timestamp{detail::require<std::int64_t>(j, "ts_us", "caption")};
  c.window_seq = detail::require<std::int64_t>(j, "window_seq", "caption");
  c.entities = detail::require<std::vector<EntityId>>(j, "entities", "caption");
}

inline void to_json(json& j, const CaptionBatch& b) {
  j = json{{"window_seq", b.window_seq}, {"captions", b.captions}, {"gaps", b.gaps}};
}

inline void from_json(const json& j, CaptionBatch& b) {
  detail::require_object(j, "caption_batch");
  b.window_seq = detail::require<std::int64_t>(j, "window_seq", "caption_batch");
  b.captions = detail::require<std::vector<Caption>>(j, "captions", "caption_batch");
  b.gaps = detail::require<std::vector<FrameId>>(j, "gaps", "caption_batch");
}

inline void to_json(json& j, const Summary& s) {
  j = json{{"summary_seq", s.summary_seq},         {"text", s.text},
           {"prev_seq", s.prev_seq},               {"source_window_seq", s.source_window_seq},
           {"created_ts_us", s.created_ts.count()}, {"carried", s.carried}};
}

inline void from_json(const json& j, Summary& s) {
  detail::require_object(j, "summary");
  s.summary_seq = detail::require<std::int64_t>(j, "summary_seq", "summary");
  s.text = detail::require<std::string>(j, "text", "summary");
  s.prev_seq = detail::require<std::int64_t>(j, "prev_seq", "summary");
  s.source_window_seq = detail::require<std::int64_t>(j, "source_window_seq", "summary");
  s.created_ts = Timestamp{detail::require<std::int64_t>(j, "created_ts_us", "summary")};
  s.carried = detail::require<bool>(j, "carried", "summary");
}

// Decision lines are the public sink format (schema version kDecisionSchemaVersion).
inline void to_json(json& j, const Decision& d) {
  j = json{{"v", kDecisionSchemaVersion},
           {"decision_id", d.decision_id},
           {"stream_id", d.stream_id},
           {"summary_seq", d.summary_seq},
           {"frame_ids", d.frame_ids},
           {"subject", d.subject},
           {"location", d.location},
           {"cause", d.cause},
           {"is_anomalous", d.is_anomalous},
           {"score", d.score},
           {"emitted_ts_us", d.emitted_ts.count()},
           {"emitted_ts", to_seconds(d.emitted_ts)}};
}

inline void from_json(const json& j, Decision& d) {
  constexpr const char* where = "decision";
  detail::require_object(j, where);
  auto version = detail::require<int>(j, "v", where);
  if (version != kDecisionSchemaVersion) {
    throw SchemaError("decision: unsupported schema version " + std::to_string(version));
  }
  d.decision_id = detail::require<std::int64_t>(j, "decision_id", where);
  d.stream_id = detail::require<std::string>(j, "stream_id", where);
  d.summary_seq = detail::require<std::int64_t>(j, "summary_seq", where);
  d.frame_ids = detail::require<std::vector<FrameId>>(j, "frame_ids", where);
  d.subject = detail::require<std::string>(j, "subject", where);
  d.location = detail::require<std::string>(j, "location", where);
  d.cause = detail::require<std::string>(j, "cause", where);
  d.is_anomalous = detail::require<bool>(j, "is_anomalous", where);
  d.score = detail::require<double>(j, "score", where);
  d.emitted_ts = Timestamp{detail::require<std::int64_t>(j, "emitted_ts_us", where)};
  if (!(d.score >= 0.0 && d.score <= 1.0)) throw SchemaError("decision: score outside [0,1]");
}

inline void to_json(json& j, const DiscriminationRequest& r) {
  j = json{{"instruction", r.instruction},
           {"identifier", r.identifier},
           {"summary", r.summary},
           {"frames", r.frames}};
}

inline void from_json(const json& j, DiscriminationRequest& r) {
  constexpr const char* where = "discrimination_request";
  detail::require_object(j, where);
  r.instruction = detail::require<std::string>(j, "instruction", where);
  r.identifier = detail::require<std::string>(j, "identifier", where);
  r.summary = detail::require<std::string>(j, "summary", where);
  r.frames = detail::require<std::vector<FrameRef>>(j, "frames", where);
}

inline std::string to_jsonl(const Decision& d) { return json(d).dump(); }

}  // namespace vigil
