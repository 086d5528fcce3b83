#pragma once

// Length-prefixed framing: 4-byte big-endian payload length, then the payload
// (canonical JSON for bus envelopes).

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "vigil/bus/channel.hpp"

namespace vigil::wire {

inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

inline std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw BusError("wire: frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(payload);
  return out;
}

// Incremental decoder for a byte stream carrying frames.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buf_.append(bytes); }

  std::optional<std::string> next() {
    if (buf_.size() - pos_ < 4) return std::nullopt;
    auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])); };
    const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (n > kMaxFrameBytes) throw BusError("wire: frame length " + std::to_string(n) + " exceeds limit");
    if (buf_.size() - pos_ < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    std::string payload = buf_.substr(pos_ + 4, n);
    pos_ += 4 + n;
    if (pos_ > 4096 && pos_ * 2 > buf_.size()) {
      buf_.erase(0, pos_);
      pos_ = 0;
    }
    return payload;
  }

  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

namespace detail {

inline void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw BusError(std::string("wire: write failed: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// false on clean EOF before any byte; throws on EOF mid-read.
inline bool read_all(int fd, char* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::read(fd, data + got, n - got);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw BusError(std::string("wire: read failed: ") + std::strerror(errno));
    }
    if (r == 0) {
      if (got == 0) return false;
      throw BusError("wire: truncated frame");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace detail

inline void write_frame(int fd, std::string_view payload) {
  auto frame = encode_frame(payload);
  detail::write_all(fd, frame.data(), frame.size());
}

// nullopt at end of stream.
inline std::optional<std::string> read_frame(int fd) {
  char header[4];
  if (!detail::read_all(fd, header, 4)) return std::nullopt;
  const std::uint32_t n = (static_cast<std::uint32_t>(static_cast<unsigned char>(header[0])) << 24) |
                          (static_cast<std::uint32_t>(static_cast<unsigned char>(header[1])) << 16) |
                          (static_cast<std::uint32_t>(static_cast<unsigned char>(header[2])) << 8) |
                          static_cast<std::uint32_t>(static_cast<unsigned char>(header[3]));
  if (n > kMaxFrameBytes) throw BusError("wire: frame length exceeds limit");
  std::string payload(n, '\0');
  if (n > 0 && !detail::read_all(fd, payload.data(), n)) throw BusError("wire: truncated frame");
  return payload;
}

}  // namespace vigil::wire
