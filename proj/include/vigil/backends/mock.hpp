#pragma once

// Deterministic scripted backends. Output depends only on (script, inputs);
// latency and faults come from a seeded generator.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vigil/backends/backend.hpp"

namespace vigil {

enum class FaultKind { error, timeout };

struct FaultPlan {
  double rate = 0.0;                  // independent failure probability per call
  std::set<FrameId> frames;           // captioner: always fail on these frames
  std::set<std::uint64_t> calls;      // fail on these call indices (0-based)
  FaultKind kind = FaultKind::error;

  bool empty() const { return rate <= 0.0 && frames.empty() && calls.empty(); }
  friend bool operator==(const FaultPlan&, const FaultPlan&) = default;
};

inline std::uint64_t mix_seed(std::uint64_t seed, BackendKind kind) {
  return seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(kind) + 1));
}

namespace detail {

inline std::string substitute_id(std::string text, FrameId id) {
  const std::string key = "{id}";
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
    auto repl = std::to_string(id);
    text.replace(pos, key.size(), repl);
    pos += repl.size();
  }
  return text;
}

// Shared latency + fault bookkeeping.
class MockCore {
 public:
  MockCore(LatencyModel latency, FaultPlan faults, std::uint64_t seed)
      : latency_(latency), faults_(std::move(faults)), rng_(seed) {
    latency_.validate();
  }

  // Draws this call's latency and fault outcome (both draws always happen, so
  // the random stream does not depend on which calls fail).
  struct Outcome {
    Duration latency;
    bool fail;
  };
  Outcome draw(std::optional<FrameId> frame = std::nullopt) {
    Duration lat = latency_.sample(rng_);
    bool fail = unit_draw(rng_) < faults_.rate;
    fail = fail || faults_.calls.contains(calls_);
    if (frame) fail = fail || faults_.frames.contains(*frame);
    ++calls_;
    return {lat, fail};
  }

  [[noreturn]] void raise(const char* who) const {
    if (faults_.kind == FaultKind::timeout) throw BackendTimeout(std::string(who) + ": injected timeout");
    throw BackendProtocolError(std::string(who) + ": injected failure");
  }

  std::uint64_t calls() const { return calls_; }
  const LatencyModel& latency() const { return latency_; }

 private:
  LatencyModel latency_;
  FaultPlan faults_;
  Rng rng_;
  std::uint64_t calls_ = 0;
};

}  // namespace detail

struct CaptionRange {
  FrameId from = 0;  // inclusive
  FrameId to = 0;    // exclusive
  std::string text;  // "{id}" is replaced by the frame id

  friend bool operator==(const CaptionRange&, const CaptionRange&) = default;
};

struct CaptionScript {
  std::map<FrameId, std::string> frames;
  std::vector<CaptionRange> ranges;        // first match wins, after exact frames
  std::string fallback = "caption {id}";

  std::string lookup(FrameId id) const {
    if (auto it = frames.find(id); it != frames.end()) return detail::substitute_id(it->second, id);
    for (const auto& r : ranges) {
      if (id >= r.from && id < r.to) return detail::substitute_id(r.text, id);
    }
    return detail::substitute_id(fallback, id);
  }

  friend bool operator==(const CaptionScript&, const CaptionScript&) = default;
};

class MockCaptioner final : public Captioner {
 public:
  explicit MockCaptioner(CaptionScript script = {}, LatencyModel latency = {}, FaultPlan faults = {},
                         std::uint64_t seed = 0)
      : script_(std::move(script)), core_(latency, std::move(faults), mix_seed(seed, BackendKind::captioner)) {}

  BackendMode mode() const override { return BackendMode::mock; }

  std::string caption(const FrameRef& frame) override {
    auto outcome = core_.draw(frame.frame_id);
    spend(outcome.latency);
    if (outcome.fail) core_.raise("captioner");
    auto text = script_.lookup(frame.frame_id);
    if (text.empty()) throw BackendProtocolError("captioner: empty caption");
    return text;
  }

  std::uint64_t calls() const { return core_.calls(); }

 private:
  CaptionScript script_;
  detail::MockCore core_;
};

// previous + "|" + space-joined descriptions.
inline std::string mock_summary_rule(std::span<const std::string> descriptions, const std::string& previous) {
  std::string out = previous + "|";
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    if (i) out += ' ';
    out += descriptions[i];
  }
  return out;
}

class MockSummarizer final : public Summarizer {
 public:
  explicit MockSummarizer(LatencyModel latency = {}, FaultPlan faults = {}, std::uint64_t seed = 0)
      : core_(latency, std::move(faults), mix_seed(seed, BackendKind::summarizer)) {}

  BackendMode mode() const override { return BackendMode::mock; }

  std::string summarize(const std::string& prompt, std::span<const std::string> descriptions,
                        const std::string& previous) override {
    if (prompt.empty()) throw std::invalid_argument("summarize: prompt must not be empty");
    auto outcome = core_.draw();
    spend(outcome.latency);
    if (outcome.fail) core_.raise("summarizer");
    return mock_summary_rule(descriptions, previous);
  }

  std::uint64_t calls() const { return core_.calls(); }

 private:
  detail::MockCore core_;
};

// A scripted reasoner answer. All present conditions must hold.
struct ReasonerRule {
  std::optional<std::string> summary;           // exact summary text
  std::optional<std::string> summary_contains;  // substring of the summary
  std::optional<std::set<FrameId>> frame_ids;   // exact adjacent frame set
  ReasonerResponse response;

  bool matches(const DiscriminationRequest& req) const {
    if (summary && req.summary != *summary) return false;
    if (summary_contains && req.summary.find(*summary_contains) == std::string::npos) return false;
    if (frame_ids) {
      std::set<FrameId> ids;
      for (const auto& f : req.frames) ids.insert(f.frame_id);
      if (ids != *frame_ids) return false;
    }
    return true;
  }

  friend bool operator==(const ReasonerRule&, const ReasonerRule&) = default;
};

struct ReasonerScript {
  std::vector<ReasonerRule> rules;
  ReasonerResponse fallback{"none", "unknown", "no abnormal behavior observed", 0.1};

  const ReasonerResponse& lookup(const DiscriminationRequest& req) const {
    for (const auto& r : rules) {
      if (r.matches(req)) return r.response;
    }
    return fallback;
  }

  friend bool operator==(const ReasonerScript&, const ReasonerScript&) = default;
};

class MockReasoner final : public Reasoner {
 public:
  explicit MockReasoner(ReasonerScript script = {}, LatencyModel latency = {}, FaultPlan faults = {},
                        std::uint64_t seed = 0)
      : script_(std::move(script)), core_(latency, std::move(faults), mix_seed(seed, BackendKind::reasoner)) {}

  BackendMode mode() const override { return BackendMode::mock; }

  ReasonerResponse discriminate(const DiscriminationRequest& request) override {
    auto outcome = core_.draw();
    spend(outcome.latency);
    if (outcome.fail) core_.raise("reasoner");
    // Scripts are checked like a remote answer would be.
    return parse_reasoner_response(json(script_.lookup(request)));
  }

  std::uint64_t calls() const { return core_.calls(); }

 private:
  ReasonerScript script_;
  detail::MockCore core_;
};

}  // namespace vigil
