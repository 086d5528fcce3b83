#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vigil/core/time.hpp"

namespace vigil {

using FrameId = std::int64_t;
using EntityId = std::size_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A timestamped handle to one frame. Immutable once produced.
struct FrameRef {
  FrameId frame_id = 0;
  Timestamp ts{0};
  std::string payload;  // locator: relative path or opaque token
  std::string stream_id;

  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

// One frame-level description produced by the captioner.
struct Caption {
  std::string text;
  FrameId frame_id = 0;
  Timestamp ts{0};
  std::int64_t window_seq = 0;
  std::vector<EntityId> entities;  // distinct, vocabulary order

  friend bool operator==(const Caption&, const Caption&) = default;
};

// Agent 1 output for one window. captions.size() + gaps.size() equals the
// number of sampled frames.
struct CaptionBatch {
  std::int64_t window_seq = 0;
  std::vector<Caption> captions;
  std::vector<FrameId> gaps;  // frames whose caption call failed

  friend bool operator==(const CaptionBatch&, const CaptionBatch&) = default;
};

inline constexpr std::int64_t kNoSummary = -1;

// One link of the causal summary chain.
struct Summary {
  std::int64_t summary_seq = 0;
  std::string text;
  std::int64_t prev_seq = kNoSummary;
  std::int64_t source_window_seq = 0;
  Timestamp created_ts{0};
  bool carried = false;  // summarizer failed; text is the predecessor's

  friend bool operator==(const Summary&, const Summary&) = default;
};

// Structured discrimination result.
struct Decision {
  std::int64_t decision_id = 0;
  std::string stream_id;
  std::int64_t summary_seq = kNoSummary;  // kNoSummary on cold start
  std::vector<FrameId> frame_ids;
  std::string subject;
  std::string location;
  std::string cause;
  bool is_anomalous = false;
  double score = 0.0;
  Timestamp emitted_ts{0};

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Text side of the Agent 3 input: instruction, frame/history markup and the
// raw summary, plus the adjacent frames themselves.
struct DiscriminationRequest {
  std::string instruction;
  std::string identifier;
  std::string summary;
  std::vector<FrameRef> frames;

  friend bool operator==(const DiscriminationRequest&, const DiscriminationRequest&) = default;
};

}  // namespace vigil
