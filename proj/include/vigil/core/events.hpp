#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "vigil/core/json_io.hpp"

namespace vigil {

// Non-fatal pipeline incident (failed backend call, carried summary, ...).
struct PipelineEvent {
  std::string stage;  // "captioner" | "summarizer" | "reasoner" | ...
  std::string kind;   // "gap" | "carried" | "suppressed" | "not_ready" | ...
  std::int64_t ref = 0;  // window_seq, summary_seq or frame id, depending on kind
  std::string message;
  Timestamp ts{0};
};

inline void to_json(json& j, const PipelineEvent& e) {
  j = json{{"event", "error"}, {"stage", e.stage},   {"kind", e.kind},
           {"ref", e.ref},     {"message", e.message}, {"ts_us", e.ts.count()}};
}

// Side channel for PipelineEvents. Thread-safe.
class EventLog {
 public:
  void record(PipelineEvent e) {
    std::lock_guard lock(mu_);
    events_.push_back(std::move(e));
  }

  std::vector<PipelineEvent> events() const {
    std::lock_guard lock(mu_);
    return events_;
  }

  std::size_t count(std::string_view kind) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : events_) n += e.kind == kind;
    return n;
  }

 private:
  mutable std::mutex mu_;
  std::vector<PipelineEvent> events_;
};

}  // namespace vigil
