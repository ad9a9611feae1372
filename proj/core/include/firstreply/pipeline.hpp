#pragma once

#include <functional>
#include <string>
#include <vector>

#include "firstreply/config.hpp"

namespace firstreply {

// Pipeline stages, in execution order for `all` (synth is standalone).
enum class Stage { synth, ingest, detect, score, cohort, stats, simulate, report };

const char* to_string(Stage stage);
Stage stage_from_string(const std::string& name);

// Runs one stage: reads predecessor artifacts from the output directory,
// writes its own artifacts plus a manifest carrying the config hash and the
// content hash of every file it read or wrote. Throws MissingArtifactError
// when a predecessor artifact is absent and ConfigError when a predecessor
// ran under a different configuration.
void run_stage(Stage stage, const PipelineConfig& config);

// ingest -> detect -> score -> cohort -> stats -> simulate -> report
void run_all(const PipelineConfig& config);

// Deterministic parallel map: out[i] = fn(i), computed on up to `threads`
// workers. Results depend only on inputs, never on scheduling.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn);

}  // namespace firstreply
