#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace vigil {

// Stream time. Fixed-point microseconds so 0.1 s arithmetic stays exact.
using Duration = std::chrono::microseconds;
using Timestamp = std::chrono::microseconds;

inline Timestamp from_seconds(double seconds) {
  if (!std::isfinite(seconds)) {
    throw std::invalid_argument("non-finite time value");
  }
  return Timestamp{static_cast<std::int64_t>(std::llround(seconds * 1e6))};
}

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e6; }

// Replay speed multiplier; infinity means as fast as possible.
inline constexpr double kUnlimitedSpeed = std::numeric_limits<double>::infinity();

// Time source for a worker. Backends "spend" latency through sleep_for so the
// same code runs against wall time or a virtual clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
  virtual void sleep_for(Duration d) = 0;
};

// Virtual clock. sleep_for advances time instantly.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{0}) : now_(start) {}

  Timestamp now() const override { return now_; }
  void sleep_for(Duration d) override {
    if (d.count() > 0) now_ += d;
  }
  void set(Timestamp t) { now_ = t; }
  void advance_to(Timestamp t) {
    if (t > now_) now_ = t;
  }

 private:
  Timestamp now_;
};

// Wall clock mapped onto stream time: stream_time = elapsed_wall * speed.
class ReplayClock final : public Clock {
 public:
  explicit ReplayClock(double speed = 1.0)
      : speed_(speed), start_(std::chrono::steady_clock::now()) {
    if (!(speed > 0.0) || std::isinf(speed)) {
      throw std::invalid_argument("ReplayClock needs a finite positive speed");
    }
  }

  Timestamp now() const override {
    auto wall = std::chrono::steady_clock::now() - start_;
    auto us = std::chrono::duration_cast<std::chrono::duration<double, std::micro>>(wall).count();
    return Timestamp{static_cast<std::int64_t>(us * speed_)};
  }

  // d is wall time; backend latency is physical, not scaled by replay speed.
  void sleep_for(Duration d) override {
    if (d.count() > 0) std::this_thread::sleep_for(d);
  }

  double speed() const { return speed_; }
  std::chrono::steady_clock::time_point start() const { return start_; }

 private:
  double speed_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace vigil
