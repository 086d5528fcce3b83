#pragma once

// HTTP/JSON clients for model servers.
//
//   POST /caption      {"frame_id", "payload"}                 -> {"text"}
//   POST /summarize    {"prompt", "descriptions", "previous"}  -> {"summary"}
//   POST /discriminate {"instruction", "identifier", "summary",
//                       "frames": [{"frame_id","ts_us","payload","stream_id"}]}
//                      -> {"subject", "location", "cause", "score"}
//
// Bodies are UTF-8 JSON. Non-200 replies and malformed bodies raise
// BackendProtocolError; timeouts raise BackendTimeout after the retries run out.

#include <chrono>
#include <string>

#include "httplib.h"
#include "vigil/backends/backend.hpp"

namespace vigil {

struct RemoteOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  Duration timeout{2'000'000};
  int retries = 1;

  friend bool operator==(const RemoteOptions&, const RemoteOptions&) = default;
};

class RemoteClient {
 public:
  explicit RemoteClient(RemoteOptions opts) : opts_(std::move(opts)), client_(opts_.endpoint) {
    if (!client_.is_valid()) throw std::invalid_argument("invalid backend endpoint '" + opts_.endpoint + "'");
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts_.timeout);
    auto usecs = opts_.timeout - std::chrono::duration_cast<Duration>(secs);
    client_.set_connection_timeout(secs.count(), usecs.count());
    client_.set_read_timeout(secs.count(), usecs.count());
    client_.set_write_timeout(secs.count(), usecs.count());
  }

  json post(const std::string& path, const json& body) {
    const std::string text = body.dump();
    for (int attempt = 0;; ++attempt) {
      auto started = std::chrono::steady_clock::now();
      auto res = client_.Post(path, text, "application/json");
      if (res) {
        if (res->status != 200) {
          throw BackendProtocolError("POST " + path + ": HTTP " + std::to_string(res->status));
        }
        try {
          return json::parse(res->body);
        } catch (const json::parse_error& e) {
          throw BackendProtocolError("POST " + path + ": invalid JSON reply: " + e.what());
        }
      }
      const auto err = res.error();
      const auto elapsed = std::chrono::steady_clock::now() - started;
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                              elapsed >= opts_.timeout * 9 / 10);
      if (attempt < opts_.retries) continue;
      if (timed_out) throw BackendTimeout("POST " + path + ": timed out");
      throw BackendProtocolError("POST " + path + ": " + httplib::to_string(err));
    }
  }

  // True when something answers HTTP at the endpoint (any status).
  bool reachable() {
    auto res = client_.Get("/");
    return static_cast<bool>(res);
  }

  const RemoteOptions& options() const { return opts_; }

 private:
  RemoteOptions opts_;
  httplib::Client client_;
};

class RemoteCaptioner final : public Captioner {
 public:
  explicit RemoteCaptioner(RemoteOptions opts) : client_(std::move(opts)) {}
  BackendMode mode() const override { return BackendMode::remote; }

  std::string caption(const FrameRef& frame) override {
    auto reply = client_.post("/caption", {{"frame_id", frame.frame_id}, {"payload", frame.payload}});
    auto it = reply.find("text");
    if (it == reply.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw BackendProtocolError("/caption: reply needs a non-empty string 'text'");
    }
    return it->get<std::string>();
  }

  RemoteClient& client() { return client_; }

 private:
  RemoteClient client_;
};

class RemoteSummarizer final : public Summarizer {
 public:
  explicit RemoteSummarizer(RemoteOptions opts) : client_(std::move(opts)) {}
  BackendMode mode() const override { return BackendMode::remote; }

  std::string summarize(const std::string& prompt, std::span<const std::string> descriptions,
                        const std::string& previous) override {
    if (prompt.empty()) throw std::invalid_argument("summarize: prompt must not be empty");
    json body{{"prompt", prompt},
              {"descriptions", std::vector<std::string>(descriptions.begin(), descriptions.end())},
              {"previous", previous}};
    auto reply = client_.post("/summarize", body);
    auto it = reply.find("summary");
    if (it == reply.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw BackendProtocolError("/summarize: reply needs a non-empty string 'summary'");
    }
    return it->get<std::string>();
  }

  RemoteClient& client() { return client_; }

 private:
  RemoteClient client_;
};

class RemoteReasoner final : public Reasoner {
 public:
  explicit RemoteReasoner(RemoteOptions opts) : client_(std::move(opts)) {}
  BackendMode mode() const override { return BackendMode::remote; }

  ReasonerResponse discriminate(const DiscriminationRequest& request) override {
    return parse_reasoner_response(client_.post("/discriminate", json(request)));
  }

  RemoteClient& client() { return client_; }

 private:
  RemoteClient client_;
};

}  // namespace vigil
