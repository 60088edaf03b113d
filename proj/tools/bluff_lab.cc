// Command-line front end: train, eval, detect, report and run (all four).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bluff/config_text.h"
#include "bluff/detect.h"
#include "bluff/harness.h"
#include "bluff/pipeline.h"
#include "bluff/report.h"

namespace fs = std::filesystem;
using namespace bluff;

namespace {

std::function<void(int64_t)> Progress(const char* label, int64_t total) {
  const int64_t every = std::max<int64_t>(1, total / 20);
  return [label, total, every](int64_t done) {
    if (done % every == 0 || done == total) {
      std::fprintf(stderr, "\r%s %lld/%lld", label, static_cast<long long>(done),
                   static_cast<long long>(total));
      if (done == total) std::fputc('\n', stderr);
    }
  };
}

RunConfig ConfigFromCheckpoint(const std::string& dir) {
  const fs::path meta = fs::path(dir) / "run-meta.json";
  if (!fs::exists(meta)) return RunConfig{};
  const auto j = nlohmann::json::parse(ReadTextFile(meta.string()));
  return RunConfig::FromText(j.at("config").dump());
}

void PrintSummary(const Report& report) {
  for (const SummaryRow& r : report.summary.rows) {
    const auto rate = r.rate();
    std::printf("%-4s %-12s attempts %7lld successes %7lld rate %s\n",
                std::string(AgentName(r.seat)).c_str(),
                std::string(DetectorName(r.detector)).c_str(),
                static_cast<long long>(r.attempts), static_cast<long long>(r.successes),
                rate ? FormatDouble(*rate).c_str() : "undefined");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CFR vs DQN bluffing laboratory for 52-card Leduc Hold'em"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train CFR and DQN against each other");
  std::string train_config;
  std::optional<uint64_t> train_seed;
  std::optional<int64_t> train_episodes;
  std::string train_out;
  train->add_option("--config", train_config, "Run configuration (JSON or key=value)");
  train->add_option("--seed", train_seed, "Override the seed");
  train->add_option("--episodes", train_episodes, "Override train_episodes");
  train->add_option("--out", train_out, "Output / checkpoint directory");

  // eval
  auto* eval = app.add_subcommand("eval", "Play frozen checkpoints against each other");
  std::string eval_ckpt, eval_out, eval_config;
  std::optional<int64_t> eval_games;
  std::optional<uint64_t> eval_seed;
  eval->add_option("--checkpoints", eval_ckpt, "Checkpoint directory from train")->required();
  eval->add_option("--games", eval_games, "Number of evaluation games");
  eval->add_option("--out", eval_out, "Output directory")->required();
  eval->add_option("--config", eval_config, "Run configuration (default: the checkpoint's)");
  eval->add_option("--seed", eval_seed, "Override the seed");

  // detect
  auto* detect = app.add_subcommand("detect", "Run bluff detectors over a decision log");
  std::string detect_log, detect_which = "both", detect_config, detect_out;
  detect->add_option("--log", detect_log, "Decision log (.jsonl or .jsonl.gz)")->required();
  detect->add_option("--detector", detect_which, "threshold | statistical | both")
      ->check(CLI::IsMember({"threshold", "statistical", "both"}));
  detect->add_option("--config", detect_config, "Detector configuration");
  detect->add_option("--out", detect_out, "Events JSONL path")->required();

  // report
  auto* report = app.add_subcommand("report", "Aggregate a log and its bluff events");
  std::string report_log, report_events, report_out, report_format = "csv";
  int report_window = 1000;
  bool report_plot = false;
  report->add_option("--log", report_log, "Decision log")->required();
  report->add_option("--events", report_events, "Events JSONL from detect")->required();
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_option("--format", report_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--window", report_window, "Win-rate window in games");
  report->add_flag("--plotdata", report_plot, "Also write plot/*.csv series");

  // run
  auto* run = app.add_subcommand("run", "train, eval, detect and report in one go");
  std::string run_config, run_out = "run";
  std::optional<uint64_t> run_seed;
  run->add_option("--config", run_config, "Run configuration");
  run->add_option("--seed", run_seed, "Override the seed");
  run->add_option("--out", run_out, "Output root directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      RunConfig c = train_config.empty() ? RunConfig{} : RunConfig::FromFile(train_config);
      if (train_seed) c.seed = *train_seed;
      if (train_episodes) c.train_episodes = *train_episodes;
      if (!train_out.empty()) c.out_dir = train_out;
      const RunResult r = RunTraining(c, Progress("train", c.train_episodes));
      std::printf("train: %lld games, dqn won %lld, cfr won %lld -> %s\n",
                  static_cast<long long>(r.games), static_cast<long long>(r.wins[kDqnSeat]),
                  static_cast<long long>(r.wins[kCfrSeat]), r.log_path.c_str());
    } else if (eval->parsed()) {
      RunConfig c = eval_config.empty() ? ConfigFromCheckpoint(eval_ckpt)
                                        : RunConfig::FromFile(eval_config);
      if (eval_games) c.eval_games = *eval_games;
      if (eval_seed) c.seed = *eval_seed;
      c.out_dir = eval_out;
      const RunResult r = RunEvaluation(c, eval_ckpt, Progress("eval", c.eval_games));
      std::printf("eval: %lld games, dqn won %lld, cfr won %lld -> %s\n",
                  static_cast<long long>(r.games), static_cast<long long>(r.wins[kDqnSeat]),
                  static_cast<long long>(r.wins[kCfrSeat]), r.log_path.c_str());
    } else if (detect->parsed()) {
      const DetectorConfig config =
          detect_config.empty() ? DetectorConfig{} : DetectorConfig::FromFile(detect_config);
      const auto log = ReadLog(detect_log);
      const DetectOutput out = RunDetectors(log, detect_which, config);
      WriteDetectOutput(out, detect_out);
      std::printf("detect: %zu events -> %s\n", out.events.size(), detect_out.c_str());
    } else if (report->parsed()) {
      const auto log = ReadLog(report_log);
      const auto events = ReadEvents(report_events);
      const Report r = BuildReport(log, events, report_window);
      EmitReport(r, report_out, ParseReportFormat(report_format), report_plot);
      PrintSummary(r);
    } else if (run->parsed()) {
      RunConfig c = run_config.empty() ? RunConfig{} : RunConfig::FromFile(run_config);
      if (run_seed) c.seed = *run_seed;
      const PipelineResult result = RunPipeline(c, run_out, [](const char* label, int64_t done,
                                                               int64_t total) {
        Progress(label, total)(done);
      });
      const Report& r = result.report;
      PrintSummary(r);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
