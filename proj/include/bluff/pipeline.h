#ifndef BLUFF_PIPELINE_H_
#define BLUFF_PIPELINE_H_

// End-to-end helpers shared by the command-line tool and the acceptance suite.

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bluff/detect.h"
#include "bluff/harness.h"
#include "bluff/report.h"

namespace bluff {

struct DetectOutput {
  std::vector<BluffEvent> events;
  nlohmann::json diagnostics;
};

// `which` is "threshold", "statistical" or "both". Truncated raises are
// reported on stderr.
DetectOutput RunDetectors(const std::vector<StepRecord>& log, const std::string& which,
                          const DetectorConfig& config);

// events.jsonl -> events.diagnostics.json (a trailing .gz is dropped first).
std::string DiagnosticsPath(const std::string& events_path);
void WriteDetectOutput(const DetectOutput& out, const std::string& events_path);

struct PipelineResult {
  RunResult train;
  RunResult eval;
  Report report;
};

// Trains into root/train, evaluates into root/eval, writes root/events.jsonl
// (both detectors, default configuration) and root/report (CSV with plot data).
// config.out_dir is ignored.
PipelineResult RunPipeline(RunConfig config, const std::string& root,
                           const std::function<void(const char*, int64_t, int64_t)>& progress =
                               nullptr);

}  // namespace bluff

#endif  // BLUFF_PIPELINE_H_
