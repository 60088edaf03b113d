#include "bluff/pipeline.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace bluff {

namespace fs = std::filesystem;

DetectOutput RunDetectors(const std::vector<StepRecord>& log, const std::string& which,
                          const DetectorConfig& config) {
  if (which != "threshold" && which != "statistical" && which != "both") {
    throw std::invalid_argument("unknown detector selection: " + which);
  }
  DetectOutput out;
  out.diagnostics["config"] = config.ToJson();
  if (which == "threshold" || which == "both") {
    DetectDiagnostics diag;
    auto events = ThresholdDetect(log, config, &diag);
    out.events.insert(out.events.end(), events.begin(), events.end());
    out.diagnostics["threshold"] = diag.ToJson();
    out.diagnostics["threshold"]["attempts"] = events.size();
  }
  if (which == "statistical" || which == "both") {
    DetectDiagnostics diag;
    const ContextStats stats = BuildContextStats(log);
    const EvTable ev = BuildEvTable(log);
    auto events = StatisticalDetect(log, stats, ev, config, &diag);
    out.events.insert(out.events.end(), events.begin(), events.end());
    out.diagnostics["statistical"] = diag.ToJson();
    out.diagnostics["statistical"]["attempts"] = events.size();
  }
  for (const char* d : {"threshold", "statistical"}) {
    if (out.diagnostics.contains(d) && out.diagnostics[d]["truncated"].get<int64_t>() > 0) {
      std::cerr << "warning: " << d << ": skipped " << out.diagnostics[d]["truncated"]
                << " raises without a following action (truncated episode)\n";
    }
  }
  return out;
}

std::string DiagnosticsPath(const std::string& events_path) {
  fs::path p(events_path);
  if (p.extension() == ".gz") p.replace_extension();
  return p.replace_extension(".diagnostics.json").string();
}

void WriteDetectOutput(const DetectOutput& out, const std::string& events_path) {
  WriteEvents(events_path, out.events);
  const std::string path = DiagnosticsPath(events_path);
  std::ofstream diag(path);
  diag << out.diagnostics.dump(2) << '\n';
  if (!diag.flush()) throw std::runtime_error("write failed: " + path);
}

PipelineResult RunPipeline(RunConfig config, const std::string& root,
                           const std::function<void(const char*, int64_t, int64_t)>& progress) {
  auto stage = [&](const char* label, int64_t total) -> std::function<void(int64_t)> {
    if (!progress) return nullptr;
    return [&progress, label, total](int64_t done) { progress(label, done, total); };
  };
  const fs::path dir(root);
  PipelineResult result;
  config.out_dir = (dir / "train").string();
  result.train = RunTraining(config, stage("train", config.train_episodes));
  const std::string checkpoints = config.out_dir;
  config.out_dir = (dir / "eval").string();
  result.eval = RunEvaluation(config, checkpoints, stage("eval", config.eval_games));
  const auto log = ReadLog(result.eval.log_path);
  const DetectOutput out = RunDetectors(log, "both", DetectorConfig{});
  WriteDetectOutput(out, (dir / "events.jsonl").string());
  result.report = BuildReport(log, out.events, config.winrate_window);
  EmitReport(result.report, (dir / "report").string(), ReportFormat::kCsv, true);
  return result;
}

}  // namespace bluff
