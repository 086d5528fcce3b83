#pragma once

// Wall-clock driver: a frame source thread plus one thread per agent, joined
// only through the bus queues (and a frame tap feeding each agent). Stream
// time is wall time scaled by the replay speed.

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "vigil/agents/caption_agent.hpp"
#include "vigil/agents/discrimination_agent.hpp"
#include "vigil/agents/summary_agent.hpp"
#include "vigil/bus/bus.hpp"
#include "vigil/core/frame_source.hpp"
#include "vigil/pipeline/components.hpp"
#include "vigil/pipeline/run_types.hpp"

namespace vigil {

class ThreadedPipeline {
 public:
  ThreadedPipeline(const StreamManifest& manifest, Components& comps, const PipelineConfig& cfg, double speed)
      : manifest_(manifest),
        cfg_(cfg),
        clock_(speed),
        caption_agent_(*comps.captioner, comps.vocab, comps.prompts.caption_template, cfg.window.samples_per_window,
                       &log_),
        summary_agent_(*comps.summarizer, comps.vocab, cfg.filter, comps.prompts.summary_prompt, clock_, &log_),
        discrimination_agent_(*comps.reasoner, comps.prompts.instruction, cfg.agent3, clock_, &log_),
        bus_(cfg.bus),
        caption_frames_(QueuePolicy{"frames_agent1", 1u << 16, Overflow::block}),
        decision_frames_(
            QueuePolicy{"frames_agent3", 4 * adjacent_ring_capacity(manifest.fps, cfg.window), Overflow::drop_oldest}) {
    validate(manifest_);
    comps.captioner->set_clock(&clock_);
    comps.summarizer->set_clock(&clock_);
    comps.reasoner->set_clock(&clock_);
  }

  // Blocks until the stream is exhausted (or *stop becomes true) and every
  // queue has drained.
  RunResult run(const DecisionSink& sink = {}, const std::atomic<bool>* stop = nullptr) {
    std::stop_source source_stop;
    {
      std::jthread watcher([&](std::stop_token st) {
        while (!st.stop_requested()) {
          if (stop && stop->load()) source_stop.request_stop();
          std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
      });
      std::jthread source([&] { guarded([&] { source_loop(source_stop.get_token()); }); });
      std::jthread agent1([&] { guarded([&] { caption_loop(); }); });
      std::jthread agent2([&] { guarded([&] { summary_loop(); }); });
      std::jthread agent3([&] { guarded([&] { decision_loop(); }); });
      guarded([&] { sink_loop(sink); });
      source.join();
      agent1.join();
      agent2.join();
      agent3.join();
      watcher.request_stop();
    }
    if (failure_) std::rethrow_exception(failure_);

    result_.counts.frames = frames_.load();
    result_.counts.windows = windows_.load();
    result_.counts.batches = batches_.load();
    result_.counts.caption_gaps = gaps_.load();
    result_.counts.summaries = summaries_.load();
    result_.counts.carried = carried_.load();
    result_.counts.suppressed = suppressed_.load();
    result_.counts.decisions = result_.decisions.size();
    result_.counts.q1_dropped = bus_.stats(QueueName::q1_captions).dropped;
    result_.counts.q2_dropped = bus_.stats(QueueName::q2_summaries).dropped;
    result_.counts.q3_dropped = bus_.stats(QueueName::q3_decisions).dropped;
    result_.events = log_.events();
    return std::move(result_);
  }

 private:
  template <class F>
  void guarded(F&& f) {
    try {
      f();
    } catch (...) {
      {
        std::lock_guard lock(failure_mu_);
        if (!failure_) failure_ = std::current_exception();
      }
      caption_frames_.close();
      decision_frames_.close();
      bus_.close_all();
    }
  }

  void source_loop(std::stop_token st) {
    FrameSource src = open_stream(manifest_, clock_.speed());
    while (auto f = src.next(st)) {
      ++frames_;
      caption_frames_.publish(*f);
      decision_frames_.publish(*f);
    }
    caption_frames_.close();
    decision_frames_.close();
  }

  void caption_loop() {
    WindowAssembler assembler(cfg_.window);
    for (;;) {
      auto polled = caption_frames_.consume();
      if (!ready(polled)) break;
      for (auto& w : assembler.push(std::get<Envelope<FrameRef>>(polled).payload)) {
        ++windows_;
        auto batch = caption_agent_.step(w);
        ++batches_;
        gaps_ += batch.gaps.size();
        bus_.publish(QueueName::q1_captions, std::move(batch), clock_.now());
      }
    }
    bus_.close(QueueName::q1_captions);
  }

  void summary_loop() {
    for (;;) {
      auto polled = bus_.consume(QueueName::q1_captions);
      if (!ready(polled)) break;
      auto s = summary_agent_.step(std::get<CaptionBatch>(std::get<Envelope<Message>>(polled).payload));
      ++summaries_;
      carried_ += s.carried;
      result_.summaries.push_back(s);  // only this thread touches summaries until join
      bus_.publish(QueueName::q2_summaries, std::move(s), clock_.now());
    }
    bus_.close(QueueName::q2_summaries);
  }

  void decision_loop() {
    FrameRing ring(adjacent_ring_capacity(manifest_.fps, cfg_.window));
    std::optional<Summary> waiting;
    std::optional<Summary> latest;
    bool frames_done = false;
    bool summaries_done = false;
    const auto period = cfg_.agent3.retrigger_period;
    Timestamp next_retrigger = clock_.now() + period;

    auto drain_frames = [&] {
      for (;;) {
        auto p = decision_frames_.try_consume();
        if (std::holds_alternative<EndOfStream>(p)) frames_done = true;
        if (!ready(p)) return;
        ring.push(std::move(std::get<Envelope<FrameRef>>(p).payload));
      }
    };
    auto discriminate = [&](const std::optional<Summary>& summary) {
      if (ring.empty()) return false;
      auto history = ring.snapshot();
      auto frames = adjacent_frames(history, ring.newest().ts, cfg_.window);
      if (!frames) return false;
      const std::int64_t seq = summary ? summary->summary_seq : kNoSummary;
      auto decision = discrimination_agent_.step(discrimination_agent_.assemble(summary, *frames), seq);
      if (decision) {
        bus_.publish(QueueName::q3_decisions, std::move(*decision), clock_.now());
      } else {
        ++suppressed_;
      }
      return true;
    };

    while (!(summaries_done && !waiting)) {
      drain_frames();
      if (!waiting && !summaries_done) {
        auto p = bus_.consume_for(QueueName::q2_summaries, std::chrono::milliseconds(5));
        if (std::holds_alternative<EndOfStream>(p)) summaries_done = true;
        if (ready(p)) waiting = std::get<Summary>(std::get<Envelope<Message>>(p).payload);
        drain_frames();
      }
      if (waiting) {
        if (discriminate(waiting)) {
          latest = std::move(waiting);
          waiting.reset();
        } else if (frames_done) {
          log_.record({"discriminator", "not_ready", waiting->summary_seq, "stream ended before enough history",
                       clock_.now()});
          waiting.reset();
        } else {
          auto p = decision_frames_.consume_for(std::chrono::milliseconds(5));
          if (std::holds_alternative<EndOfStream>(p)) frames_done = true;
          if (ready(p)) ring.push(std::move(std::get<Envelope<FrameRef>>(p).payload));
        }
      }
      if (period.count() > 0 && !waiting && !frames_done && clock_.now() >= next_retrigger) {
        if (latest || cfg_.agent3.cold_start == ColdStart::empty_history) discriminate(latest);
        next_retrigger += period;
      }
    }
    bus_.close(QueueName::q3_decisions);
  }

  void sink_loop(const DecisionSink& sink) {
    for (;;) {
      auto p = bus_.consume(QueueName::q3_decisions);
      if (!ready(p)) break;
      auto d = std::get<Decision>(std::get<Envelope<Message>>(p).payload);
      if (sink) sink(d);
      result_.decisions.push_back(std::move(d));
    }
  }

  const StreamManifest& manifest_;
  const PipelineConfig& cfg_;
  ReplayClock clock_;
  EventLog log_;
  CaptionAgent caption_agent_;
  SummaryAgent summary_agent_;
  DiscriminationAgent discrimination_agent_;
  Bus bus_;
  Channel<FrameRef> caption_frames_;
  Channel<FrameRef> decision_frames_;

  std::atomic<std::uint64_t> frames_{0}, windows_{0}, batches_{0}, gaps_{0}, summaries_{0}, carried_{0},
      suppressed_{0};
  RunResult result_;
  std::mutex failure_mu_;
  std::exception_ptr failure_;
};

}  // namespace vigil
