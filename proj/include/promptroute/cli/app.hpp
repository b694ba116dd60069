#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "promptroute/cli/config.hpp"

namespace promptroute::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitStage = 4 };

// A stage ran but could not produce its artifact (e.g. every request failed).
class StageFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subcommand arguments that are not part of PipelineConfig.
struct GenerateArgs {
  std::string dataset;     // overrides paths.instances
  std::string endpoint;    // overrides paths.endpoint
  std::string strategies;  // comma separated; overrides generate.strategies
  std::string out;         // log file; default <out>/logs/<backbone>.jsonl
  std::string assets;      // template asset directory
};

struct SignificanceArgs {
  std::string accuracy;              // default <out>/accuracy.csv
  std::vector<std::string> compare;  // "a:b"; default: each learned method vs translate and vs native
  std::vector<std::string> backbones;
  std::string out = "significance_table.csv";
};

// Stage entry points; `log` receives progress lines. Each stage publishes its
// outputs under cfg.out_dir() together with manifests/<stage>.json.
void run_generate(const PipelineConfig& cfg, const GenerateArgs& args, std::ostream& log);
void run_ingest(const PipelineConfig& cfg, std::ostream& log);
void run_annotation_request(const PipelineConfig& cfg, std::ostream& log);
void run_featurize(const PipelineConfig& cfg, std::ostream& log);
void run_train(const PipelineConfig& cfg, std::ostream& log);
void run_evaluate(const PipelineConfig& cfg, std::ostream& log);
void run_quality(const PipelineConfig& cfg, std::ostream& log);
void run_significance(const PipelineConfig& cfg, const SignificanceArgs& args, std::ostream& log);
void run_report(const PipelineConfig& cfg, std::ostream& log);
// generate (when enabled), ingest, featurize, train, evaluate, quality (when
// references are configured), report.
void run_all(const PipelineConfig& cfg, std::ostream& log);

// Parses argv, runs the subcommand and maps failures to exit codes with a
// "[stage]"-tagged message on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace promptroute::cli
