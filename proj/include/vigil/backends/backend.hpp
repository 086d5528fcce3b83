#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>

#include "vigil/core/json_io.hpp"
#include "vigil/core/time.hpp"
#include "vigil/core/types.hpp"

namespace vigil {

struct BackendError : Error {
  using Error::Error;
};
struct BackendTimeout : BackendError {
  using BackendError::BackendError;
};
struct BackendProtocolError : BackendError {
  using BackendError::BackendError;
};

enum class BackendKind { captioner, summarizer, reasoner };
enum class BackendMode { mock, remote };

inline const char* to_string(BackendKind k) {
  switch (k) {
    case BackendKind::captioner: return "captioner";
    case BackendKind::summarizer: return "summarizer";
    case BackendKind::reasoner: return "reasoner";
  }
  return "?";
}

using Rng = std::mt19937_64;

// Uniform draw in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
inline double unit_draw(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct LatencyModel {
  enum class Kind { fixed, uniform };
  Kind kind = Kind::fixed;
  Duration lo{0};
  Duration hi{0};

  static LatencyModel fixed(Duration d) { return {Kind::fixed, d, d}; }
  static LatencyModel uniform(Duration lo, Duration hi) { return {Kind::uniform, lo, hi}; }

  void validate() const {
    if (lo.count() < 0 || hi.count() < 0) throw std::invalid_argument("latency must be >= 0");
    if (kind == Kind::uniform && hi < lo) throw std::invalid_argument("latency: uniform needs lo <= hi");
  }

  Duration sample(Rng& rng) const {
    if (kind == Kind::fixed) return lo;
    auto span = static_cast<double>((hi - lo).count());
    return lo + Duration{static_cast<std::int64_t>(std::floor(unit_draw(rng) * span))};
  }

  // Upper bound of any sample.
  Duration max() const { return kind == Kind::fixed ? lo : hi; }

  friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

struct ReasonerResponse {
  std::string subject;
  std::string location;
  std::string cause;
  double score = 0.0;

  friend bool operator==(const ReasonerResponse&, const ReasonerResponse&) = default;
};

inline void to_json(json& j, const ReasonerResponse& r) {
  j = json{{"subject", r.subject}, {"location", r.location}, {"cause", r.cause}, {"score", r.score}};
}

// Schema check for reasoner output; violations are protocol errors.
inline ReasonerResponse parse_reasoner_response(const json& j) {
  if (!j.is_object()) throw BackendProtocolError("reasoner response: expected a JSON object");
  ReasonerResponse r;
  auto text = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw BackendProtocolError(std::string("reasoner response: missing field '") + key + "'");
    if (!it->is_string()) throw BackendProtocolError(std::string("reasoner response: '") + key + "' must be a string");
    return it->get<std::string>();
  };
  r.subject = text("subject");
  r.location = text("location");
  r.cause = text("cause");
  auto it = j.find("score");
  if (it == j.end()) throw BackendProtocolError("reasoner response: missing field 'score'");
  if (!it->is_number()) throw BackendProtocolError("reasoner response: 'score' must be a number");
  r.score = it->get<double>();
  if (!(r.score >= 0.0 && r.score <= 1.0)) {
    throw BackendProtocolError("reasoner response: score " + std::to_string(r.score) + " outside [0,1]");
  }
  return r;
}

inline void from_json(const json& j, ReasonerResponse& r) { r = parse_reasoner_response(j); }

// Where backends spend their latency. nullptr means wall-clock sleep.
class LatencySink {
 public:
  void set_clock(Clock* clock) { clock_ = clock; }

 protected:
  void spend(Duration d) const {
    if (d.count() <= 0) return;
    if (clock_) {
      clock_->sleep_for(d);
    } else {
      std::this_thread::sleep_for(d);
    }
  }

 private:
  Clock* clock_ = nullptr;
};

class Captioner : public LatencySink {
 public:
  virtual ~Captioner() = default;
  virtual BackendMode mode() const = 0;
  virtual std::string caption(const FrameRef& frame) = 0;
};

class Summarizer : public LatencySink {
 public:
  virtual ~Summarizer() = default;
  virtual BackendMode mode() const = 0;
  virtual std::string summarize(const std::string& prompt, std::span<const std::string> descriptions,
                                const std::string& previous) = 0;
};

class Reasoner : public LatencySink {
 public:
  virtual ~Reasoner() = default;
  virtual BackendMode mode() const = 0;
  virtual ReasonerResponse discriminate(const DiscriminationRequest& request) = 0;
};

}  // namespace vigil
