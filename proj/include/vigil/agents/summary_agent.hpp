#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vigil/backends/backend.hpp"
#include "vigil/core/events.hpp"
#include "vigil/entity_filter.hpp"

namespace vigil {

struct FilterConfig {
  std::size_t tau = kDefaultTau;
  std::size_t horizon = 10;  // captions; default 2 x samples_per_window
  ScreenRule rule = ScreenRule::prefix_cut;
  bool enabled = true;

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

// Agent 2: folds each caption batch into the summary chain,
//   h_s = summarize(prompt, filter(batch), h_prev).
// A failed summarizer call re-emits the predecessor as a carried summary, so
// summary_seq never skips.
class SummaryAgent {
 public:
  SummaryAgent(Summarizer& summarizer, const EntityVocabulary& vocab, FilterConfig filter, std::string prompt,
               Clock& clock, EventLog* events = nullptr)
      : summarizer_(summarizer),
        vocab_(vocab),
        filter_(filter),
        prompt_(std::move(prompt)),
        clock_(clock),
        events_(events),
        horizon_(filter.horizon) {
    if (prompt_.empty()) throw std::invalid_argument("summary agent: prompt must not be empty");
  }

  Summary step(const CaptionBatch& batch) {
    const std::int64_t expected = prev_ ? prev_->summary_seq + 1 : 0;
    if (batch.window_seq != expected) {
      throw std::logic_error("summary agent: batch for window " + std::to_string(batch.window_seq) +
                             " but chain expects " + std::to_string(expected));
    }

    for (const auto& c : batch.captions) horizon_.push(c);
    std::vector<Caption> kept;
    if (filter_.enabled) {
      auto window = horizon_.items();
      last_screen_ = screen_main_entities(count_entities(window, vocab_), filter_.tau, filter_.rule);
      kept = filter_captions(batch.captions, last_screen_);
    } else {
      kept = batch.captions;
    }
    last_descriptions_.clear();
    for (const auto& c : kept) last_descriptions_.push_back(c.text);

    Summary s;
    s.summary_seq = batch.window_seq;
    s.prev_seq = prev_ ? prev_->summary_seq : kNoSummary;
    s.source_window_seq = batch.window_seq;
    const std::string previous = prev_ ? prev_->text : std::string{};
    try {
      s.text = summarizer_.summarize(prompt_, last_descriptions_, previous);
    } catch (const BackendError& e) {
      s.text = previous;
      s.carried = true;
      if (events_) events_->record({"summarizer", "carried", s.summary_seq, e.what(), clock_.now()});
    }
    s.created_ts = clock_.now();
    prev_ = s;
    return s;
  }

  const std::optional<Summary>& previous() const { return prev_; }
  const std::vector<std::string>& last_descriptions() const { return last_descriptions_; }
  const ScreenResult& last_screen() const { return last_screen_; }

 private:
  Summarizer& summarizer_;
  const EntityVocabulary& vocab_;
  FilterConfig filter_;
  std::string prompt_;
  Clock& clock_;
  EventLog* events_;
  CaptionHorizon horizon_;
  std::optional<Summary> prev_;
  std::vector<std::string> last_descriptions_;
  ScreenResult last_screen_;
};

}  // namespace vigil
