#pragma once

// The three pipeline queues: Q1 caption batches (Agent 1 -> Agent 2), Q2
// summaries (Agent 2 -> Agent 3) and Q3 decisions (Agent 3 -> sink). In wire
// mode every envelope is stored as a length-prefixed canonical JSON frame and
// decoded on consume, exactly as it would travel between processes.

#include <array>
#include <memory>
#include <string>
#include <variant>

#include "vigil/bus/channel.hpp"
#include "vigil/bus/wire.hpp"
#include "vigil/core/json_io.hpp"

namespace vigil {

using Message = std::variant<CaptionBatch, Summary, Decision>;

enum class QueueName { q1_captions = 0, q2_summaries = 1, q3_decisions = 2 };

inline const char* to_string(QueueName q) {
  switch (q) {
    case QueueName::q1_captions: return "Q1_captions";
    case QueueName::q2_summaries: return "Q2_summaries";
    case QueueName::q3_decisions: return "Q3_decisions";
  }
  return "?";
}

inline const char* kind_name(const Message& m) {
  switch (m.index()) {
    case 0: return "caption_batch";
    case 1: return "summary";
    default: return "decision";
  }
}

struct BusConfig {
  QueuePolicy q1{"Q1_captions", 16, Overflow::block};
  QueuePolicy q2{"Q2_summaries", 1, Overflow::latest_wins};
  QueuePolicy q3{"Q3_decisions", 4096, Overflow::drop_oldest};
  bool wire = false;

  friend bool operator==(const BusConfig&, const BusConfig&) = default;
};

namespace wire {

inline std::string encode_envelope(std::uint64_t seq, Timestamp produced_ts, const Message& m) {
  json payload = std::visit([](const auto& v) { return json(v); }, m);
  json env{{"seq", seq}, {"produced_ts_us", produced_ts.count()}, {"kind", kind_name(m)}, {"payload", payload}};
  return env.dump();
}

inline Envelope<Message> decode_envelope(std::string_view text) {
  json env;
  try {
    env = json::parse(text);
  } catch (const json::parse_error& e) {
    throw BusError(std::string("wire: invalid envelope JSON: ") + e.what());
  }
  try {
    Envelope<Message> out;
    out.seq = env.at("seq").get<std::uint64_t>();
    out.produced_ts = Timestamp{env.at("produced_ts_us").get<std::int64_t>()};
    const auto kind = env.at("kind").get<std::string>();
    const auto& p = env.at("payload");
    if (kind == "caption_batch") {
      out.payload = p.get<CaptionBatch>();
    } else if (kind == "summary") {
      out.payload = p.get<Summary>();
    } else if (kind == "decision") {
      out.payload = p.get<Decision>();
    } else {
      throw BusError("wire: unknown payload kind '" + kind + "'");
    }
    return out;
  } catch (const json::exception& e) {
    throw BusError(std::string("wire: malformed envelope: ") + e.what());
  } catch (const SchemaError& e) {
    throw BusError(std::string("wire: ") + e.what());
  }
}

}  // namespace wire

class Bus {
  // In-memory message or encoded wire frame.
  using Packet = std::variant<Message, std::string>;

  auto packer(Message& m, Timestamp produced_ts) {
    return [this, &m, produced_ts](std::uint64_t seq) -> Packet {
      if (cfg_.wire) return wire::encode_frame(wire::encode_envelope(seq, produced_ts, m));
      return std::move(m);
    };
  }

 public:
  explicit Bus(BusConfig cfg = {}) : cfg_(std::move(cfg)) {
    queues_[0] = std::make_unique<Channel<Packet>>(cfg_.q1);
    queues_[1] = std::make_unique<Channel<Packet>>(cfg_.q2);
    queues_[2] = std::make_unique<Channel<Packet>>(cfg_.q3);
  }

  const BusConfig& config() const { return cfg_; }

  std::uint64_t publish(QueueName q, Message m, Timestamp produced_ts = Timestamp{0}) {
    check_kind(q, m);
    return channel(q).publish_with(packer(m, produced_ts), produced_ts);
  }

  bool try_publish(QueueName q, Message m, Timestamp produced_ts = Timestamp{0}) {
    check_kind(q, m);
    return channel(q).try_publish_with(packer(m, produced_ts), produced_ts);
  }

  Poll<Message> consume(QueueName q) { return unpack(channel(q).consume()); }
  Poll<Message> try_consume(QueueName q) { return unpack(channel(q).try_consume()); }

  template <class Rep, class Period>
  Poll<Message> consume_for(QueueName q, std::chrono::duration<Rep, Period> timeout) {
    return unpack(channel(q).consume_for(timeout));
  }

  void close(QueueName q) { channel(q).close(); }
  void close_all() {
    for (auto& c : queues_) c->close();
  }

  ChannelStats stats(QueueName q) const { return queues_[static_cast<int>(q)]->stats(); }

 private:
  Channel<Packet>& channel(QueueName q) { return *queues_[static_cast<int>(q)]; }

  static void check_kind(QueueName q, const Message& m) {
    if (static_cast<int>(m.index()) != static_cast<int>(q)) {
      throw BusError(std::string("cannot publish ") + kind_name(m) + " onto " + to_string(q));
    }
  }

  static Poll<Message> unpack(Poll<Packet> p) {
    if (std::holds_alternative<NotReady>(p)) return NotReady{};
    if (std::holds_alternative<EndOfStream>(p)) return EndOfStream{};
    auto& env = std::get<Envelope<Packet>>(p);
    if (auto* msg = std::get_if<Message>(&env.payload)) {
      return Envelope<Message>{env.seq, env.produced_ts, std::move(*msg)};
    }
    wire::FrameDecoder decoder;
    decoder.feed(std::get<std::string>(env.payload));
    auto frame = decoder.next();
    if (!frame) throw BusError("wire: incomplete frame in queue");
    auto decoded = wire::decode_envelope(*frame);
    if (decoded.seq != env.seq) throw BusError("wire: sequence mismatch");
    return decoded;
  }

  BusConfig cfg_;
  std::array<std::unique_ptr<Channel<Packet>>, 3> queues_;
};

}  // namespace vigil
