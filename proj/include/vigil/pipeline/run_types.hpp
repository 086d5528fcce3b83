#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vigil/core/events.hpp"
#include "vigil/core/json_io.hpp"

namespace vigil {

struct RunCounts {
  std::uint64_t frames = 0;
  std::uint64_t windows = 0;
  std::uint64_t batches = 0;
  std::uint64_t caption_gaps = 0;
  std::uint64_t summaries = 0;
  std::uint64_t carried = 0;
  std::uint64_t decisions = 0;
  std::uint64_t suppressed = 0;
  std::uint64_t q1_dropped = 0;
  std::uint64_t q2_dropped = 0;
  std::uint64_t q3_dropped = 0;

  friend bool operator==(const RunCounts&, const RunCounts&) = default;
};

inline void to_json(json& j, const RunCounts& c) {
  j = json{{"frames", c.frames},         {"windows", c.windows},       {"batches", c.batches},
           {"caption_gaps", c.caption_gaps}, {"summaries", c.summaries}, {"carried", c.carried},
           {"decisions", c.decisions},   {"suppressed", c.suppressed}, {"q1_dropped", c.q1_dropped},
           {"q2_dropped", c.q2_dropped}, {"q3_dropped", c.q3_dropped}};
}

// Stream-time stamps for one caption window's trip through Agents 1 and 2.
struct WindowTiming {
  std::int64_t window_seq = 0;
  Timestamp closed_ts{0};
  Timestamp caption_start{0};
  Timestamp caption_done{0};
  Timestamp summary_start{0};
  Timestamp summary_done{0};
};

struct DecisionTiming {
  std::int64_t decision_id = -1;  // -1 when the call was suppressed
  std::int64_t summary_seq = kNoSummary;
  Timestamp start{0};
  Timestamp done{0};
};

struct RunResult {
  RunCounts counts;
  std::vector<Decision> decisions;
  std::vector<Summary> summaries;
  std::vector<WindowTiming> windows;
  std::vector<DecisionTiming> discriminations;
  std::vector<PipelineEvent> events;
};

using DecisionSink = std::function<void(const Decision&)>;

}  // namespace vigil
