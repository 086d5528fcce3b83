#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <variant>

#include "vigil/core/types.hpp"

namespace vigil {

struct BusError : Error {
  using Error::Error;
};

enum class Overflow {
  block,        // producer waits for space
  drop_oldest,  // evict the oldest undelivered item
  latest_wins,  // a publish supersedes every undelivered item
};

inline const char* to_string(Overflow o) {
  switch (o) {
    case Overflow::block: return "block";
    case Overflow::drop_oldest: return "drop_oldest";
    case Overflow::latest_wins: return "latest_wins";
  }
  return "?";
}

inline Overflow overflow_from_string(const std::string& s) {
  if (s == "block") return Overflow::block;
  if (s == "drop_oldest") return Overflow::drop_oldest;
  if (s == "latest_wins") return Overflow::latest_wins;
  throw std::invalid_argument("unknown overflow policy '" + s + "' (block|drop_oldest|latest_wins)");
}

struct QueuePolicy {
  std::string name;
  std::size_t capacity = 1;
  Overflow overflow = Overflow::block;

  friend bool operator==(const QueuePolicy&, const QueuePolicy&) = default;
};

template <class T>
struct Envelope {
  std::uint64_t seq = 0;
  Timestamp produced_ts{0};
  T payload;
};

struct NotReady {};
struct EndOfStream {};

template <class T>
using Poll = std::variant<Envelope<T>, NotReady, EndOfStream>;

struct ChannelStats {
  std::uint64_t published = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
};

// Bounded single-producer/single-consumer queue with an overflow policy.
// Sequence numbers are assigned at publish time, so the consumer always sees
// them increasing.
template <class T>
class Channel {
 public:
  explicit Channel(QueuePolicy policy) : policy_(std::move(policy)) {
    if (policy_.capacity < 1) throw std::invalid_argument("queue " + policy_.name + ": capacity must be >= 1");
  }

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  const QueuePolicy& policy() const { return policy_; }

  std::uint64_t publish(T item, Timestamp produced_ts = Timestamp{0}) {
    return publish_with([&](std::uint64_t) { return std::move(item); }, produced_ts);
  }

  // make(seq) builds the stored item once the sequence number is known.
  template <class Make>
  std::uint64_t publish_with(Make&& make, Timestamp produced_ts = Timestamp{0}) {
    std::unique_lock lock(mu_);
    if (policy_.overflow == Overflow::block) {
      not_full_.wait(lock, [&] { return closed_ || items_.size() < policy_.capacity; });
    }
    return push_locked(std::forward<Make>(make), produced_ts);
  }

  // Non-blocking publish. Under Overflow::block a full queue returns false.
  template <class Make>
  bool try_publish_with(Make&& make, Timestamp produced_ts = Timestamp{0}) {
    std::unique_lock lock(mu_);
    if (policy_.overflow == Overflow::block && items_.size() >= policy_.capacity && !closed_) return false;
    push_locked(std::forward<Make>(make), produced_ts);
    return true;
  }

  bool try_publish(T item, Timestamp produced_ts = Timestamp{0}) {
    return try_publish_with([&](std::uint64_t) { return std::move(item); }, produced_ts);
  }

  // Blocks until an item is available or the queue is closed and drained.
  Poll<T> consume() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    return pop_locked();
  }

  template <class Rep, class Period>
  Poll<T> consume_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    not_empty_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); });
    return pop_locked();
  }

  Poll<T> try_consume() {
    std::unique_lock lock(mu_);
    return pop_locked();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

  ChannelStats stats() const {
    std::lock_guard lock(mu_);
    return {published_, delivered_, dropped_, items_.size()};
  }

 private:
  template <class Make>
  std::uint64_t push_locked(Make&& make, Timestamp produced_ts) {
    if (closed_) throw BusError("queue " + policy_.name + " is closed");
    if (policy_.overflow == Overflow::latest_wins) {
      dropped_ += items_.size();
      items_.clear();
    } else if (policy_.overflow == Overflow::drop_oldest && items_.size() >= policy_.capacity) {
      items_.pop_front();
      ++dropped_;
    }
    const std::uint64_t seq = next_seq_++;
    items_.push_back(Envelope<T>{seq, produced_ts, make(seq)});
    ++published_;
    not_empty_.notify_one();
    return seq;
  }

  Poll<T> pop_locked() {
    if (items_.empty()) {
      if (closed_) return EndOfStream{};
      return NotReady{};
    }
    Envelope<T> env = std::move(items_.front());
    items_.pop_front();
    ++delivered_;
    not_full_.notify_one();
    return env;
  }

  QueuePolicy policy_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<Envelope<T>> items_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t published_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

template <class T>
bool ready(const Poll<T>& p) { return std::holds_alternative<Envelope<T>>(p); }

template <class T>
bool end_of_stream(const Poll<T>& p) { return std::holds_alternative<EndOfStream>(p); }

}  // namespace vigil
