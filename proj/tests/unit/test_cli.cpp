#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "promptroute/cli/app.hpp"
#include "promptroute/cli/artifacts.hpp"
#include "promptroute/core/hash.hpp"
#include "promptroute/learners/model.hpp"
#include "support/paths.hpp"
#include "synth/synth.hpp"

using namespace promptroute;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome promptroute_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "promptroute");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path demo(const std::string& tag, std::size_t per_language = 30) {
  const auto dir = testing::scratch_dir(tag);
  synth::CorpusSpec spec;
  spec.per_language = per_language;
  spec.backbones = {"ds", "llama"};
  synth::write_demo(dir, spec);
  return dir;
}

void append(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::app) << text; }

std::map<std::string, std::string> checksums(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = core::sha256_file(e.path());
  }
  return out;
}

bool has_temp_files(const fs::path& root) {
  if (!fs::exists(root)) return false;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().extension() == ".tmp") return true;
  }
  return false;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(promptroute_cli({}).code == cli::kExitConfig);
  CHECK(promptroute_cli({"frobnicate"}).code == cli::kExitConfig);
  CHECK(promptroute_cli({"ingest", "--no-such-flag"}).code == cli::kExitConfig);
  const auto missing = promptroute_cli({"--config", "/nonexistent/pipeline.toml", "ingest"});
  CHECK(missing.code == cli::kExitConfig);
  CHECK(missing.err.find("[ingest]") != std::string::npos);
  CHECK(missing.err.find("/nonexistent/pipeline.toml") != std::string::npos);

  const auto v = promptroute_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(cli::kVersion) != std::string::npos);
}

TEST_CASE("cli: config problems exit 2 and name the key") {
  const auto dir = demo("cli_config", 5);
  const auto cfg = dir / "demo.toml";
  append(cfg, "\n[learner]\nkind = \"svm\"\n");
  // duplicate table is a TOML parse error
  auto r = promptroute_cli({"--config", cfg.string(), "ingest"});
  CHECK(r.code == cli::kExitConfig);

  std::ofstream(cfg) << "[paths]\nlogs = [\"logs/ds.jsonl\"]\nbogus = 1\n";
  r = promptroute_cli({"--config", cfg.string(), "ingest"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("paths.bogus") != std::string::npos);

  std::ofstream(cfg) << "[paths]\nlogs = [\"logs/missing.jsonl\"]\n";
  r = promptroute_cli({"--config", cfg.string(), "ingest"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("missing.jsonl") != std::string::npos);

  std::ofstream(cfg) << "[split]\ntrain_fraction = 1.5\n";
  CHECK(promptroute_cli({"--config", cfg.string(), "ingest"}).code == cli::kExitConfig);
}

TEST_CASE("cli: invalid records exit 3 and write nothing") {
  const auto dir = demo("cli_data", 5);
  append(dir / "logs" / "ds.jsonl", R"({"id": "broken", "dataset": "global_mmlu"})" "\n");
  const auto r = promptroute_cli({"--config", (dir / "demo.toml").string(), "ingest"});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("[ingest] data error") != std::string::npos);
  CHECK(r.err.find("ds.jsonl") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "pairs.jsonl"));
  CHECK_FALSE(has_temp_files(dir / "out"));
}

TEST_CASE("cli: missing annotation file is a featurize config error naming the path") {
  const auto dir = demo("cli_annotations", 10);
  const auto cfg = (dir / "demo.toml").string();
  REQUIRE(promptroute_cli({"--config", cfg, "ingest"}).code == 0);
  const auto r = promptroute_cli({"--config", cfg, "featurize", "--annotations", (dir / "nope.jsonl").string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("[featurize]") != std::string::npos);
  CHECK(r.err.find("nope.jsonl") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "ds" / "features_train.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "manifests" / "featurize.json"));
}

TEST_CASE("cli: stages out of order ask for the earlier stage") {
  const auto dir = demo("cli_order", 5);
  const auto r = promptroute_cli({"--config", (dir / "demo.toml").string(), "train"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("run ingest first") != std::string::npos);
}

TEST_CASE("cli: full pipeline is byte-identical across reruns and thread counts") {
  const auto dir = demo("cli_rerun", 30);
  const auto cfg = (dir / "demo.toml").string();
  const auto a = promptroute_cli({"--config", cfg, "--threads", "1", "all"});
  REQUIRE_MESSAGE(a.code == 0, a.err);
  const auto first = checksums(dir / "out");
  for (const auto* f : {"pairs.jsonl", "split.json", "ds/model.json", "llama/features_eval.csv", "routed.jsonl",
                        "accuracy.csv", "report.md", "quality/percentiles.csv", "REPORT.md", "manifests/train.json"}) {
    CHECK_MESSAGE(first.count(f) == 1, f);
  }
  fs::remove_all(dir / "out");
  const auto b = promptroute_cli({"--config", cfg, "--threads", "4", "all"});
  REQUIRE(b.code == 0);
  CHECK(checksums(dir / "out") == first);

  // a different seed moves the split
  const auto c = promptroute_cli({"--config", cfg, "--seed", "8", "--out-dir", (dir / "other").string(), "ingest"});
  REQUIRE(c.code == 0);
  CHECK(core::sha256_file(dir / "other" / "split.json") != first.at("split.json"));
}

TEST_CASE("cli: manifests record checksums, config and versions") {
  const auto dir = demo("cli_manifest", 10);
  REQUIRE(promptroute_cli({"--config", (dir / "demo.toml").string(), "ingest"}).code == 0);
  std::ifstream in(dir / "out" / "manifests" / "ingest.json");
  const auto m = nlohmann::json::parse(in);
  CHECK(m["stage"] == "ingest");
  CHECK(m["versions"]["promptroute"] == cli::kVersion);
  CHECK(m["seed"] == 7);
  CHECK(m["config"]["split"]["train_fraction"] == 0.1);
  REQUIRE(m["inputs"].size() == 2);
  CHECK(m["inputs"][0]["sha256"] == core::sha256_file(dir / "logs" / "ds.jsonl"));
  std::map<std::string, std::string> outputs;
  for (const auto& o : m["outputs"]) outputs[o["path"]] = o["sha256"];
  CHECK(outputs.at("pairs.jsonl") == core::sha256_file(dir / "out" / "pairs.jsonl"));
  CHECK(outputs.at("split.json") == core::sha256_file(dir / "out" / "split.json"));
}

TEST_CASE("cli: encoder mismatch at evaluate exits 3 without partial output") {
  const auto dir = demo("cli_mismatch", 20);
  const auto cfg = (dir / "demo.toml").string();
  for (const auto* stage : {"ingest", "featurize", "train"}) REQUIRE(promptroute_cli({"--config", cfg, stage}).code == 0);
  const auto model_path = dir / "out" / "llama" / "model.json";
  auto model = learners::load_model(model_path);
  model.metadata["encoder_version"] = "0000000000000000";
  learners::save_model(model_path, model);
  const auto r = promptroute_cli({"--config", cfg, "evaluate"});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("[evaluate]") != std::string::npos);
  CHECK(r.err.find("encoder") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "routed.jsonl"));
  CHECK_FALSE(has_temp_files(dir / "out"));
}

TEST_CASE("cli: stage writer drops uncommitted outputs") {
  const auto dir = testing::scratch_dir("cli_writer");
  {
    cli::StageWriter w("x", dir);
    w.write("a.txt", [](std::ostream& o) { o << "a"; });
    w.write("sub/b.txt", [](std::ostream& o) { o << "b"; });
    CHECK(fs::exists(dir / "a.txt.tmp"));
  }
  CHECK_FALSE(fs::exists(dir / "a.txt"));
  CHECK_FALSE(has_temp_files(dir));
  {
    cli::StageWriter w("x", dir);
    w.write("a.txt", [](std::ostream& o) { o << "a"; });
    w.commit({{"seed", 3}});
  }
  CHECK(fs::exists(dir / "a.txt"));
  CHECK(fs::exists(dir / "manifests" / "x.json"));
  CHECK_FALSE(has_temp_files(dir));
}

TEST_CASE("cli: significance over the published accuracy table") {
  const auto dir = testing::scratch_dir("cli_significance");
  const auto r = promptroute_cli({"--out-dir", dir.string(), "significance", "--accuracy",
                      testing::fixture("published_accuracy.csv").string(), "--backbone", "ds"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::ifstream in(dir / "significance_table.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("xgboost vs translate") != std::string::npos);
  CHECK(ss.str().find("mlp vs native") != std::string::npos);
  CHECK(ss.str().find("llama") == std::string::npos);

  const auto bad = promptroute_cli({"--out-dir", dir.string(), "significance", "--accuracy",
                        testing::fixture("published_accuracy.csv").string(), "--compare", "classifier"});
  CHECK(bad.code == cli::kExitConfig);
  const auto unknown = promptroute_cli({"--out-dir", dir.string(), "significance", "--accuracy",
                                        testing::fixture("published_accuracy.csv").string(), "--compare", "svm:native"});
  CHECK(unknown.code == cli::kExitData);
}

TEST_CASE("cli: generate against an unreachable endpoint fails the stage") {
  const auto dir = testing::scratch_dir("cli_generate");
  std::ofstream(dir / "instances.jsonl") << R"({"schema": 1, "kind": "instances"}
{"id": "a", "dataset": "global_mmlu", "language": "de", "question": "q", "options": ["x", "y"], "gold": "A"}
)";
  std::ofstream(dir / "endpoint.toml") << R"([endpoint]
base_url = "http://127.0.0.1:9/v1"
model = "m"
backbone = "ds"
max_retries = 0
timeout_seconds = 2
)";
  const auto r = promptroute_cli({"--out-dir", (dir / "out").string(), "generate", "--dataset", (dir / "instances.jsonl").string(),
                      "--endpoint", (dir / "endpoint.toml").string()});
  CHECK(r.code == cli::kExitStage);
  CHECK(r.err.find("[generate] stage failed") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "logs" / "ds.jsonl"));
}
