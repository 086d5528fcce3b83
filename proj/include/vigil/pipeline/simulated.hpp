#pragma once

// Discrete-event driver on a virtual clock. Frames arrive at their manifest
// timestamps; each agent is a single server whose service time is the latency
// its backends spend on the agent's ManualClock. Runs are deterministic for a
// fixed config and seed, which is how speed-infinity replays and `simulate`
// are executed.

#include <atomic>
#include <deque>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "vigil/agents/caption_agent.hpp"
#include "vigil/agents/discrimination_agent.hpp"
#include "vigil/agents/summary_agent.hpp"
#include "vigil/bus/bus.hpp"
#include "vigil/core/manifest.hpp"
#include "vigil/pipeline/components.hpp"
#include "vigil/pipeline/run_types.hpp"
#include "vigil/windowing.hpp"

namespace vigil {

class SimulatedPipeline {
 public:
  SimulatedPipeline(const StreamManifest& manifest, Components& comps, const PipelineConfig& cfg)
      : manifest_(manifest),
        cfg_(cfg),
        caption_agent_(*comps.captioner, comps.vocab, comps.prompts.caption_template, cfg.window.samples_per_window,
                       &log_),
        summary_agent_(*comps.summarizer, comps.vocab, cfg.filter, comps.prompts.summary_prompt, clock2_, &log_),
        discrimination_agent_(*comps.reasoner, comps.prompts.instruction, cfg.agent3, clock3_, &log_),
        bus_(cfg.bus),
        assembler_(cfg.window),
        ring_(adjacent_ring_capacity(manifest.fps, cfg.window)) {
    validate(manifest_);
    comps.captioner->set_clock(&clock1_);
    comps.summarizer->set_clock(&clock2_);
    comps.reasoner->set_clock(&clock3_);
  }

  SimulatedPipeline(const SimulatedPipeline&) = delete;
  SimulatedPipeline& operator=(const SimulatedPipeline&) = delete;

  // Single use. `sink` sees each Decision as it leaves Q3; `stop` ends frame
  // delivery early (in-flight work still drains).
  RunResult run(const DecisionSink& sink = {}, const std::atomic<bool>* stop = nullptr) {
    if (ran_) throw std::logic_error("SimulatedPipeline::run called twice");
    ran_ = true;
    sink_ = &sink;
    stop_ = stop;
    if (!manifest_.frames.empty()) schedule(manifest_.frames.front().ts, Ev::frame, 0);
    if (cfg_.agent3.retrigger_period.count() > 0) schedule(cfg_.agent3.retrigger_period, Ev::retrigger, 0);

    while (!heap_.empty()) {
      Event e = heap_.top();
      heap_.pop();
      switch (e.kind) {
        case Ev::caption_done: on_caption_done(e.t); break;
        case Ev::summary_done: on_summary_done(e.t); break;
        case Ev::decision_done: on_decision_done(e.t); break;
        case Ev::frame: on_frame(e.t, e.index); break;
        case Ev::retrigger: on_retrigger(e.t); break;
      }
    }

    result_.counts.q1_dropped = bus_.stats(QueueName::q1_captions).dropped;
    result_.counts.q2_dropped = bus_.stats(QueueName::q2_summaries).dropped;
    result_.counts.q3_dropped = bus_.stats(QueueName::q3_decisions).dropped;
    result_.events = log_.events();
    return std::move(result_);
  }

 private:
  // Completions sort before arrivals at the same instant.
  enum class Ev { caption_done = 0, summary_done = 1, decision_done = 2, frame = 3, retrigger = 4 };

  struct Event {
    Timestamp t;
    Ev kind;
    std::uint64_t order;
    std::size_t index;

    bool operator>(const Event& o) const {
      if (t != o.t) return t > o.t;
      if (kind != o.kind) return kind > o.kind;
      return order > o.order;
    }
  };

  void schedule(Timestamp t, Ev kind, std::size_t index) { heap_.push({t, kind, order_++, index}); }

  WindowTiming& timing(std::int64_t seq) {
    auto idx = static_cast<std::size_t>(seq);
    if (result_.windows.size() <= idx) result_.windows.resize(idx + 1);
    result_.windows[idx].window_seq = seq;
    return result_.windows[idx];
  }

  void on_frame(Timestamp t, std::size_t index) {
    const auto& mf = manifest_.frames[index];
    FrameRef f{mf.frame_id, mf.ts, mf.payload, manifest_.stream_id};
    ++result_.counts.frames;
    ring_.push(f);
    for (auto& w : assembler_.push(f)) {
      ++result_.counts.windows;
      timing(w.window_seq).closed_ts = t;
      caption_pending_.push_back(std::move(w));
    }
    const bool stopping = stop_ && stop_->load();
    if (!stopping && index + 1 < manifest_.frames.size()) {
      schedule(manifest_.frames[index + 1].ts, Ev::frame, index + 1);
    }
    try_start_caption(t);
    try_start_decision(t);
  }

  void try_start_caption(Timestamp t) {
    if (caption_busy_ || caption_pending_.empty()) return;
    SampledWindow w = std::move(caption_pending_.front());
    caption_pending_.pop_front();
    clock1_.set(t);
    timing(w.window_seq).caption_start = t;
    caption_result_ = caption_agent_.step(w);
    caption_busy_ = true;
    schedule(clock1_.now(), Ev::caption_done, 0);
  }

  void on_caption_done(Timestamp t) {
    auto& batch = *caption_result_;
    timing(batch.window_seq).caption_done = t;
    ++result_.counts.batches;
    result_.counts.caption_gaps += batch.gaps.size();
    if (bus_.try_publish(QueueName::q1_captions, batch, t)) {
      caption_result_.reset();
      caption_busy_ = false;
      try_start_caption(t);
    } else {
      caption_blocked_ = true;  // Q1 full: Agent 1 waits for Agent 2
    }
    try_start_summary(t);
  }

  void try_start_summary(Timestamp t) {
    if (summary_busy_) return;
    auto polled = bus_.try_consume(QueueName::q1_captions);
    if (!ready(polled)) return;
    auto batch = std::get<CaptionBatch>(std::get<Envelope<Message>>(polled).payload);

    if (caption_blocked_) {
      bus_.publish(QueueName::q1_captions, *caption_result_, t);
      caption_result_.reset();
      caption_blocked_ = false;
      caption_busy_ = false;
    }

    clock2_.set(t);
    timing(batch.window_seq).summary_start = t;
    summary_result_ = summary_agent_.step(batch);
    summary_busy_ = true;
    schedule(clock2_.now(), Ev::summary_done, 0);
    try_start_caption(t);
  }

  void on_summary_done(Timestamp t) {
    auto& s = *summary_result_;
    timing(s.source_window_seq).summary_done = t;
    ++result_.counts.summaries;
    result_.counts.carried += s.carried;
    result_.summaries.push_back(s);
    bus_.publish(QueueName::q2_summaries, s, t);
    summary_result_.reset();
    summary_busy_ = false;
    try_start_summary(t);
    try_start_decision(t);
  }

  // One discrimination per fresh summary (latest wins on Q2).
  void try_start_decision(Timestamp t) {
    if (decision_busy_) return;
    if (!waiting_summary_) {
      auto polled = bus_.try_consume(QueueName::q2_summaries);
      if (!ready(polled)) return;
      waiting_summary_ = std::get<Summary>(std::get<Envelope<Message>>(polled).payload);
    }
    if (start_decision(t, waiting_summary_)) {
      latest_summary_ = std::move(waiting_summary_);
      waiting_summary_.reset();
    }
  }

  // false when the frame history is not deep enough yet.
  bool start_decision(Timestamp t, const std::optional<Summary>& summary) {
    if (ring_.empty()) return false;
    auto history = ring_.snapshot();
    auto frames = adjacent_frames(history, ring_.newest().ts, cfg_.window);
    if (!frames) {
      if (!not_ready_logged_) {
        log_.record({"discriminator", "not_ready", summary ? summary->summary_seq : kNoSummary,
                     "adjacent frame history too short; retrying on next frame", t});
        not_ready_logged_ = true;
      }
      return false;
    }
    not_ready_logged_ = false;
    clock3_.set(t);
    const std::int64_t seq = summary ? summary->summary_seq : kNoSummary;
    auto request = discrimination_agent_.assemble(summary, *frames);
    decision_result_ = discrimination_agent_.step(request, seq);
    if (!decision_result_) ++result_.counts.suppressed;
    result_.discriminations.push_back(
        {decision_result_ ? decision_result_->decision_id : -1, seq, t, clock3_.now()});
    decision_busy_ = true;
    schedule(clock3_.now(), Ev::decision_done, 0);
    return true;
  }

  void on_decision_done(Timestamp t) {
    if (decision_result_) {
      bus_.publish(QueueName::q3_decisions, *decision_result_, t);
      decision_result_.reset();
      drain_decisions();
    }
    decision_busy_ = false;
    try_start_decision(t);
  }

  void on_retrigger(Timestamp t) {
    if (!decision_busy_ && !waiting_summary_) {
      const bool cold = !latest_summary_;
      if (!(cold && cfg_.agent3.cold_start == ColdStart::block)) start_decision(t, latest_summary_);
    }
    const bool frames_left = result_.counts.frames < manifest_.frames.size() && !(stop_ && stop_->load());
    if (frames_left) schedule(t + cfg_.agent3.retrigger_period, Ev::retrigger, 0);
  }

  void drain_decisions() {
    for (;;) {
      auto polled = bus_.try_consume(QueueName::q3_decisions);
      if (!ready(polled)) return;
      auto d = std::get<Decision>(std::get<Envelope<Message>>(polled).payload);
      ++result_.counts.decisions;
      if (sink_ && *sink_) (*sink_)(d);
      result_.decisions.push_back(std::move(d));
    }
  }

  const StreamManifest& manifest_;
  const PipelineConfig& cfg_;
  ManualClock clock1_, clock2_, clock3_;
  EventLog log_;
  CaptionAgent caption_agent_;
  SummaryAgent summary_agent_;
  DiscriminationAgent discrimination_agent_;
  Bus bus_;
  WindowAssembler assembler_;
  FrameRing ring_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
  std::uint64_t order_ = 0;

  std::deque<SampledWindow> caption_pending_;
  bool caption_busy_ = false;
  bool caption_blocked_ = false;
  std::optional<CaptionBatch> caption_result_;

  bool summary_busy_ = false;
  std::optional<Summary> summary_result_;

  bool decision_busy_ = false;
  bool not_ready_logged_ = false;
  std::optional<Summary> waiting_summary_;
  std::optional<Summary> latest_summary_;
  std::optional<Decision> decision_result_;

  RunResult result_;
  const DecisionSink* sink_ = nullptr;
  const std::atomic<bool>* stop_ = nullptr;
  bool ran_ = false;
};

}  // namespace vigil
