#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <stop_token>
#include <thread>

#include "vigil/core/manifest.hpp"

namespace vigil {

// Replays a manifest in timestamp order. At a finite speed s, frame i is
// released at wall time start + (ts_i - ts_0) / s; at kUnlimitedSpeed there is
// no delay. Single consumer.
class FrameSource {
 public:
  FrameSource(std::shared_ptr<const StreamManifest> manifest, double speed)
      : manifest_(std::move(manifest)), speed_(speed) {}

  std::optional<FrameRef> next(std::stop_token stop = {}) {
    if (index_ >= manifest_->frames.size()) return std::nullopt;
    const auto& f = manifest_->frames[index_];
    if (std::isfinite(speed_)) {
      if (index_ == 0) start_ = std::chrono::steady_clock::now();
      auto offset = std::chrono::duration<double, std::micro>(
          static_cast<double>((f.ts - manifest_->frames.front().ts).count()) / speed_);
      auto due = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset);
      // Sleep in slices so a stop request is honoured promptly.
      while (std::chrono::steady_clock::now() < due) {
        if (stop.stop_requested()) return std::nullopt;
        auto slice = std::min<std::chrono::steady_clock::duration>(
            due - std::chrono::steady_clock::now(), std::chrono::milliseconds(20));
        std::this_thread::sleep_for(slice);
      }
    }
    if (stop.stop_requested()) return std::nullopt;
    ++index_;
    return FrameRef{f.frame_id, f.ts, f.payload, manifest_->stream_id};
  }

  std::size_t yielded() const { return index_; }
  std::size_t size() const { return manifest_->frames.size(); }
  const StreamManifest& manifest() const { return *manifest_; }

 private:
  std::shared_ptr<const StreamManifest> manifest_;
  double speed_;
  std::size_t index_ = 0;
  std::chrono::steady_clock::time_point start_{};
};

// Validates the manifest and returns a replay source. speed must be > 0
// (kUnlimitedSpeed allowed).
inline FrameSource open_stream(const StreamManifest& manifest, double speed) {
  if (!(speed > 0.0)) throw std::invalid_argument("replay speed must be > 0");
  validate(manifest);
  return FrameSource(std::make_shared<const StreamManifest>(manifest), speed);
}

}  // namespace vigil
