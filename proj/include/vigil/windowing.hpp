#pragma once

// Frame sampling schedules:
//  - caption windows of window_len frames advancing by stride, each uniformly
//    subsampled to samples_per_window frames;
//  - the adjacent buffer: adjacent_count frames spaced adjacent_spacing apart,
//    ending at the newest frame.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vigil/core/types.hpp"

namespace vigil {

struct WindowConfig {
  std::int64_t window_len = 100;
  std::int64_t stride = 70;
  std::int64_t samples_per_window = 5;
  std::int64_t adjacent_count = 8;
  Duration adjacent_spacing{100'000};

  void validate() const {
    if (!(stride > 0 && stride <= window_len)) {
      throw std::invalid_argument("window: need 0 < stride <= window_len");
    }
    if (!(samples_per_window >= 1 && samples_per_window <= window_len)) {
      throw std::invalid_argument("window: need 1 <= samples_per_window <= window_len");
    }
    if (adjacent_count < 1) throw std::invalid_argument("window: adjacent_count must be >= 1");
    if (adjacent_spacing.count() <= 0) throw std::invalid_argument("window: adjacent_spacing must be > 0");
  }

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

// Half-open frame-id interval [start, end).
struct WindowBounds {
  FrameId start = 0;
  FrameId end = 0;

  std::int64_t length() const { return end - start; }
  bool contains(FrameId id) const { return id >= start && id < end; }
  friend bool operator==(const WindowBounds&, const WindowBounds&) = default;
};

inline WindowBounds window_bounds(std::int64_t window_seq, const WindowConfig& cfg) {
  if (window_seq < 0) throw std::invalid_argument("window_seq must be >= 0");
  FrameId start = window_seq * cfg.stride;
  return {start, start + cfg.window_len};
}

// start + floor(j * (end - start) / k), j = 0..k-1.
inline std::vector<FrameId> uniform_sample(FrameId start, FrameId end, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("uniform_sample: k must be >= 1");
  const std::int64_t width = end - start;
  if (width < k) throw std::invalid_argument("uniform_sample: k exceeds the window length");
  std::vector<FrameId> ids;
  ids.reserve(static_cast<std::size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) ids.push_back(start + (j * width) / k);
  return ids;
}

// Nearest-neighbour selection of the adjacent frames ending at now_ts.
// `buffer` must be chronological. Returns nullopt (not ready) when the buffer
// does not reach back (adjacent_count - 1) * spacing before now_ts. Only frames
// with ts <= now_ts are candidates; ties go to the earlier frame.
inline std::optional<std::vector<FrameRef>> adjacent_frames(std::span<const FrameRef> buffer,
                                                            Timestamp now_ts, const WindowConfig& cfg) {
  auto last = std::upper_bound(buffer.begin(), buffer.end(), now_ts,
                               [](Timestamp t, const FrameRef& f) { return t < f.ts; });
  std::span<const FrameRef> usable(buffer.begin(), last);
  const Timestamp earliest_target = now_ts - cfg.adjacent_spacing * (cfg.adjacent_count - 1);
  if (usable.empty() || usable.front().ts > earliest_target) return std::nullopt;

  std::vector<FrameRef> out;
  out.reserve(static_cast<std::size_t>(cfg.adjacent_count));
  for (std::int64_t j = cfg.adjacent_count - 1; j >= 0; --j) {
    const Timestamp target = now_ts - cfg.adjacent_spacing * j;
    auto it = std::lower_bound(usable.begin(), usable.end(), target,
                               [](const FrameRef& f, Timestamp t) { return f.ts < t; });
    if (it == usable.end()) {
      out.push_back(usable.back());
    } else if (it == usable.begin()) {
      out.push_back(*it);
    } else {
      auto before = std::prev(it);
      // Among equal timestamps keep the earliest frame.
      while (before != usable.begin() && std::prev(before)->ts == before->ts) --before;
      out.push_back((target - before->ts) <= (it->ts - target) ? *before : *it);
    }
  }
  return out;
}

// Bounded chronological frame history owned by the discrimination worker.
class FrameRing {
 public:
  explicit FrameRing(std::size_t capacity) : slots_(std::max<std::size_t>(capacity, 1)) {}

  void push(FrameRef frame) {
    slots_[(head_ + size_) % slots_.size()] = std::move(frame);
    if (size_ < slots_.size()) {
      ++size_;
    } else {
      head_ = (head_ + 1) % slots_.size();
    }
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }
  bool empty() const { return size_ == 0; }
  const FrameRef& operator[](std::size_t i) const { return slots_[(head_ + i) % slots_.size()]; }
  const FrameRef& newest() const { return (*this)[size_ - 1]; }

  std::vector<FrameRef> snapshot() const {
    std::vector<FrameRef> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back((*this)[i]);
    return out;
  }

 private:
  std::vector<FrameRef> slots_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// At least fps * spacing * adjacent_count * 2 frames.
inline std::size_t adjacent_ring_capacity(double fps, const WindowConfig& cfg) {
  double need = fps * static_cast<double>(cfg.adjacent_spacing.count()) / 1e6 *
                static_cast<double>(cfg.adjacent_count) * 2.0;
  return std::max<std::size_t>(static_cast<std::size_t>(std::ceil(need)),
                               static_cast<std::size_t>(cfg.adjacent_count) * 2);
}

struct SampledWindow {
  std::int64_t window_seq = 0;
  WindowBounds bounds;
  std::vector<FrameRef> frames;  // resolved samples, frame order
  std::vector<FrameId> missing;  // sample ids with no frame anywhere in the window
};

// Collects arriving frames and closes window w when a frame with id
// >= start_w + window_len - 1 arrives. No partial windows.
class WindowAssembler {
 public:
  explicit WindowAssembler(WindowConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  std::vector<SampledWindow> push(const FrameRef& frame) {
    std::vector<SampledWindow> closed;
    if (frame.frame_id >= window_bounds(next_seq_, cfg_).start) pending_[frame.frame_id] = frame;
    while (frame.frame_id >= window_bounds(next_seq_, cfg_).end - 1) {
      closed.push_back(close(next_seq_));
      ++next_seq_;
      pending_.erase(pending_.begin(), pending_.lower_bound(window_bounds(next_seq_, cfg_).start));
    }
    return closed;
  }

  std::int64_t next_window_seq() const { return next_seq_; }

 private:
  SampledWindow close(std::int64_t seq) const {
    SampledWindow w;
    w.window_seq = seq;
    w.bounds = window_bounds(seq, cfg_);
    for (FrameId id : uniform_sample(w.bounds.start, w.bounds.end, cfg_.samples_per_window)) {
      if (auto it = pending_.find(id); it != pending_.end()) {
        w.frames.push_back(it->second);
        continue;
      }
      // Gap in frame ids: fall back to the nearest frame inside the window.
      auto after = pending_.lower_bound(id);
      const FrameRef* best = nullptr;
      if (after != pending_.end() && after->first < w.bounds.end) best = &after->second;
      if (after != pending_.begin()) {
        auto before = std::prev(after);
        if (before->first >= w.bounds.start &&
            (best == nullptr || id - before->first <= best->frame_id - id)) {
          best = &before->second;
        }
      }
      if (best) {
        w.frames.push_back(*best);
      } else {
        w.missing.push_back(id);
      }
    }
    return w;
  }

  WindowConfig cfg_;
  std::int64_t next_seq_ = 0;
  std::map<FrameId, FrameRef> pending_;
};

}  // namespace vigil
