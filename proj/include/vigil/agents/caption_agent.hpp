#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "vigil/agents/prompts.hpp"
#include "vigil/backends/backend.hpp"
#include "vigil/core/events.hpp"
#include "vigil/entity_filter.hpp"
#include "vigil/windowing.hpp"

namespace vigil {

// Agent 1: one caption per sampled frame. A failed backend call leaves a gap
// record in the batch; later windows are never held back.
class CaptionAgent {
 public:
  CaptionAgent(Captioner& captioner, const EntityVocabulary& vocab, std::string caption_template,
               std::int64_t samples_per_window, EventLog* events = nullptr)
      : captioner_(captioner),
        vocab_(vocab),
        template_(std::move(caption_template)),
        samples_(samples_per_window),
        events_(events) {}

  CaptionBatch step(std::int64_t window_seq, std::span<const FrameRef> frames,
                    std::span<const FrameId> missing = {}) {
    if (static_cast<std::int64_t>(frames.size() + missing.size()) != samples_) {
      throw std::invalid_argument("caption step: expected " + std::to_string(samples_) + " frames, got " +
                                  std::to_string(frames.size() + missing.size()));
    }
    CaptionBatch batch;
    batch.window_seq = window_seq;
    for (FrameId id : missing) {
      batch.gaps.push_back(id);
      log(window_seq, id, "no frame available for sample");
    }
    for (const auto& frame : frames) {
      try {
        Caption c;
        c.text = apply_caption_template(template_, captioner_.caption(frame));
        c.frame_id = frame.frame_id;
        c.ts = frame.ts;
        c.window_seq = window_seq;
        c.entities = vocab_.mentioned(c.text);
        batch.captions.push_back(std::move(c));
      } catch (const BackendError& e) {
        batch.gaps.push_back(frame.frame_id);
        log(window_seq, frame.frame_id, e.what());
      }
    }
    return batch;
  }

  CaptionBatch step(const SampledWindow& window) { return step(window.window_seq, window.frames, window.missing); }

 private:
  void log(std::int64_t window_seq, FrameId frame, const std::string& what) {
    if (events_) events_->record({"captioner", "gap", frame, "window " + std::to_string(window_seq) + ": " + what, {}});
  }

  Captioner& captioner_;
  const EntityVocabulary& vocab_;
  std::string template_;
  std::int64_t samples_;
  EventLog* events_;
};

}  // namespace vigil
