#pragma once

#include <optional>
#include <span>
#include <string>

#include "vigil/agents/prompts.hpp"
#include "vigil/backends/backend.hpp"
#include "vigil/core/events.hpp"

namespace vigil {

enum class ColdStart {
  empty_history,  // discriminate before the first summary with <history></history>
  block,          // wait for the first summary
};

struct DiscriminationConfig {
  double threshold = 0.5;
  ColdStart cold_start = ColdStart::empty_history;
  Duration retrigger_period{0};  // 0 disables periodic re-trigger

  friend bool operator==(const DiscriminationConfig&, const DiscriminationConfig&) = default;
};

// Escapes markup characters so a summary can never close its own envelope.
inline std::string escape_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// "<image><sep><image>...<image><history>summary</history>"
inline std::string build_identifier(std::size_t frame_count, std::string_view summary) {
  std::string id;
  for (std::size_t i = 0; i < frame_count; ++i) {
    if (i) id += kFrameSeparator;
    id += kFramePlaceholder;
  }
  id += kHistoryOpen;
  id += escape_markup(summary);
  id += kHistoryClose;
  return id;
}

// Instruction, identifier and summary concatenated, as the text encoder sees them.
inline std::string request_text(const DiscriminationRequest& r) {
  return r.instruction + "\n" + r.identifier;
}

inline DiscriminationRequest assemble_request(const std::optional<Summary>& summary,
                                              std::span<const FrameRef> frames, const std::string& instruction) {
  DiscriminationRequest r;
  r.instruction = instruction;
  r.summary = summary ? summary->text : std::string{};
  r.identifier = build_identifier(frames.size(), r.summary);
  r.frames.assign(frames.begin(), frames.end());
  return r;
}

// Agent 3: turns (freshest summary, adjacent frames) into a Decision.
class DiscriminationAgent {
 public:
  DiscriminationAgent(Reasoner& reasoner, std::string instruction, DiscriminationConfig cfg, Clock& clock,
                      EventLog* events = nullptr)
      : reasoner_(reasoner), instruction_(std::move(instruction)), cfg_(cfg), clock_(clock), events_(events) {}

  DiscriminationRequest assemble(const std::optional<Summary>& summary, std::span<const FrameRef> frames) const {
    return assemble_request(summary, frames, instruction_);
  }

  // nullopt when the backend fails or answers outside the schema; the reason
  // goes to the event log.
  std::optional<Decision> step(const DiscriminationRequest& request, std::int64_t summary_seq) {
    ReasonerResponse resp;
    try {
      resp = reasoner_.discriminate(request);
    } catch (const BackendError& e) {
      if (events_) events_->record({"reasoner", "suppressed", summary_seq, e.what(), clock_.now()});
      return std::nullopt;
    }
    Decision d;
    d.decision_id = next_id_++;
    d.stream_id = request.frames.empty() ? std::string{} : request.frames.front().stream_id;
    d.summary_seq = summary_seq;
    for (const auto& f : request.frames) d.frame_ids.push_back(f.frame_id);
    d.subject = std::move(resp.subject);
    d.location = std::move(resp.location);
    d.cause = std::move(resp.cause);
    d.score = resp.score;
    d.is_anomalous = resp.score >= cfg_.threshold;
    d.emitted_ts = clock_.now();
    return d;
  }

  const DiscriminationConfig& config() const { return cfg_; }

 private:
  Reasoner& reasoner_;
  std::string instruction_;
  DiscriminationConfig cfg_;
  Clock& clock_;
  EventLog* events_;
  std::int64_t next_id_ = 0;
};

}  // namespace vigil
