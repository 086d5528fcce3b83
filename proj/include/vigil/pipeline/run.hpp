#pragma once

#include <atomic>
#include <cmath>

#include "vigil/pipeline/simulated.hpp"
#include "vigil/pipeline/threaded.hpp"

namespace vigil {

// Infinite speed runs on the virtual clock (deterministic); any finite speed
// replays against the wall clock.
inline RunResult run_pipeline(const PipelineConfig& cfg, Components& comps, const StreamManifest& manifest,
                              const DecisionSink& sink = {}, const std::atomic<bool>* stop = nullptr) {
  if (std::isinf(cfg.speed)) {
    SimulatedPipeline p(manifest, comps, cfg);
    return p.run(sink, stop);
  }
  ThreadedPipeline p(manifest, comps, cfg, cfg.speed);
  return p.run(sink, stop);
}

}  // namespace vigil
