#pragma once

#include <filesystem>
#include <fstream>
#include <memory>

#include "vigil/agents/prompts.hpp"
#include "vigil/pipeline/config.hpp"

namespace vigil {

inline std::unique_ptr<Captioner> make_captioner(const BackendSpec& s, std::uint64_t seed) {
  if (s.mode == BackendMode::remote) return std::make_unique<RemoteCaptioner>(s.remote);
  return std::make_unique<MockCaptioner>(s.caption_script, s.latency, s.faults, seed);
}

inline std::unique_ptr<Summarizer> make_summarizer(const BackendSpec& s, std::uint64_t seed) {
  if (s.mode == BackendMode::remote) return std::make_unique<RemoteSummarizer>(s.remote);
  return std::make_unique<MockSummarizer>(s.latency, s.faults, seed);
}

inline std::unique_ptr<Reasoner> make_reasoner(const BackendSpec& s, std::uint64_t seed) {
  if (s.mode == BackendMode::remote) return std::make_unique<RemoteReasoner>(s.remote);
  return std::make_unique<MockReasoner>(s.reasoner_script, s.latency, s.faults, seed);
}

// Everything the agents need besides the stream itself.
struct Components {
  EntityVocabulary vocab;
  Prompts prompts;
  std::unique_ptr<Captioner> captioner;
  std::unique_ptr<Summarizer> summarizer;
  std::unique_ptr<Reasoner> reasoner;

  bool all_mock() const {
    return captioner->mode() == BackendMode::mock && summarizer->mode() == BackendMode::mock &&
           reasoner->mode() == BackendMode::mock;
  }
};

inline EntityVocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"filter.vocab: cannot open " + path.string()});
  try {
    return EntityVocabulary::parse(in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("filter.vocab: ") + e.what()});
  }
}

inline Components build_components(const PipelineConfig& cfg, const std::filesystem::path& default_prompts_dir) {
  Components c;
  c.vocab = load_vocabulary(cfg.resolve(cfg.vocab));
  try {
    c.prompts = load_prompts(cfg.prompts_dir.empty() ? default_prompts_dir : cfg.resolve(cfg.prompts_dir));
  } catch (const PromptError& e) {
    throw ConfigError({std::string("prompts.dir: ") + e.what()});
  }
  c.captioner = make_captioner(cfg.captioner, cfg.seed);
  c.summarizer = make_summarizer(cfg.summarizer, cfg.seed);
  c.reasoner = make_reasoner(cfg.reasoner, cfg.seed);
  return c;
}

// Startup probe for remote backends; throws BackendError naming the first
// unreachable endpoint.
inline void check_remote_backends(const PipelineConfig& cfg) {
  for (const auto* spec : {&cfg.captioner, &cfg.summarizer, &cfg.reasoner}) {
    if (spec->mode != BackendMode::remote) continue;
    RemoteClient client(spec->remote);
    if (!client.reachable()) {
      throw BackendError(std::string(to_string(spec->kind)) + " backend unreachable at " + spec->remote.endpoint);
    }
  }
}

}  // namespace vigil
