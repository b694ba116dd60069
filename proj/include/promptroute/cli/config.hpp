#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "promptroute/core/types.hpp"
#include "promptroute/eval/wilcoxon.hpp"
#include "promptroute/featurize/encoder.hpp"
#include "promptroute/ingest/ingest.hpp"
#include "promptroute/learners/model.hpp"
#include "promptroute/quality/quality.hpp"

namespace promptroute::cli {

inline constexpr std::string_view kVersion = "0.1.0";

struct PipelinePaths {
  std::filesystem::path instances;  // generate input
  std::filesystem::path endpoint;   // endpoint TOML; may be the config file itself
  std::vector<std::filesystem::path> logs;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> references;
  std::vector<std::filesystem::path> scores;  // bleurt/meteor CSVs
  std::filesystem::path out = "out";
};

// Relative paths resolve against base_dir (the config file's directory).
struct PipelineConfig {
  std::filesystem::path base_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::string> backbones;  // empty: every backbone in the logs
  PipelinePaths paths;
  ingest::SplitSpec split;
  featurize::EncoderOptions features;
  learners::ModelKind learner = learners::ModelKind::gbdt;
  std::string preset = "auto";  // auto, default, ds, llama
  eval::WilcoxonMode wilcoxon = eval::WilcoxonMode::automatic;
  std::vector<quality::Metric> metrics{quality::Metric::chrf};
  bool per_language = false;
  std::vector<core::Strategy> strategies{core::Strategy::native, core::Strategy::translate};
  bool generate_in_all = false;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path out_dir() const { return resolve(paths.out); }
  // Snapshot recorded in manifests; paths as written, seed included.
  nlohmann::json to_json() const;
  // Throws ConfigError.
  void validate() const;
};

// Throws ConfigError on syntax errors, unknown keys or bad values.
PipelineConfig pipeline_config_from_toml(std::string_view text, const std::string& source,
                                         const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// "auto" picks the backbone's tuned preset when one exists.
learners::GbdtConfig gbdt_config_for(const PipelineConfig& c, const std::string& backbone);
learners::MlpConfig mlp_config_for(const PipelineConfig& c, const std::string& backbone);

std::vector<core::Strategy> parse_strategies(std::string_view csv);

}  // namespace promptroute::cli
