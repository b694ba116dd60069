#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "promptroute/cli/app.hpp"
#include "promptroute/core/errors.hpp"
#include "promptroute/ingest/ingest.hpp"
#include "promptroute/learners/model.hpp"

namespace promptroute::cli {

namespace {

struct GlobalOptions {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

PipelineConfig make_config(const GlobalOptions& g) {
  PipelineConfig cfg;
  if (!g.config.empty()) {
    if (!std::filesystem::is_regular_file(g.config)) throw core::ConfigError("config not found: " + g.config);
    cfg = load_pipeline_config(g.config);
  } else {
    cfg.base_dir = ".";
  }
  if (!g.out_dir.empty()) cfg.paths.out = std::filesystem::absolute(g.out_dir);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-instance prompt routing for multilingual evaluation", "promptroute"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config, "pipeline TOML config");
  app.add_option("-o,--out-dir", g.out_dir, "output directory (overrides paths.out)");
  app.add_option("--seed", g.seed, "global seed (overrides config)");
  app.add_option("--threads", g.threads, "worker threads; 0 = hardware concurrency");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "query an OpenAI-compatible endpoint for every strategy");
  generate->add_option("--dataset", gen.dataset, "instances JSONL");
  generate->add_option("--endpoint", gen.endpoint, "endpoint TOML");
  generate->add_option("--strategies", gen.strategies, "comma-separated strategies");
  generate->add_option("--out", gen.out, "response log path");
  generate->add_option("--assets", gen.assets, "template asset directory");

  std::vector<std::string> logs;
  std::optional<double> train_frac;
  auto* ingest = app.add_subcommand("ingest", "score responses, build labeled pairs and the train/eval split");
  ingest->add_option("--log", logs, "response log (repeatable; replaces paths.logs)");
  ingest->add_option("--train-frac", train_frac, "training fraction");

  std::string annotations_path;
  auto* annotation_request = app.add_subcommand("annotation-request", "write texts and pairs for the annotator");
  auto* featurize = app.add_subcommand("featurize", "fit the encoder and write feature matrices");
  featurize->add_option("--annotations", annotations_path, "annotation JSONL (overrides paths.annotations)");
  std::string model_kind, preset;
  auto* train = app.add_subcommand("train", "fit one router per backbone");
  train->add_option("--model", model_kind, "gbdt or mlp (overrides learner.kind)");
  train->add_option("--preset", preset, "auto, default, ds or llama (overrides learner.preset)");
  auto* evaluate = app.add_subcommand("evaluate", "route the eval split and write accuracy reports");
  std::string references_path;
  auto* quality = app.add_subcommand("quality", "translation quality percentiles of routed instances");
  quality->add_option("--references", references_path, "reference JSONL (overrides paths.references)");

  SignificanceArgs sig;
  auto* significance = app.add_subcommand("significance", "Wilcoxon signed-rank tests over an accuracy table");
  significance->add_option("--accuracy", sig.accuracy, "long-form accuracy CSV");
  significance->add_option("--compare", sig.compare, "method_a:method_b (repeatable)");
  significance->add_option("--backbone", sig.backbones, "restrict to backbone (repeatable)");
  significance->add_option("--out", sig.out, "output CSV, relative to the output directory");

  auto* report = app.add_subcommand("report", "assemble REPORT.md");
  auto* all = app.add_subcommand("all", "ingest through report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string stage = sub->get_name();
  try {
    auto cfg = make_config(g);
    if (sub == ingest) {
      if (!logs.empty()) {
        cfg.paths.logs.clear();
        for (const auto& l : logs) cfg.paths.logs.emplace_back(std::filesystem::absolute(l));
      }
      if (train_frac) cfg.split.train_fraction = *train_frac;
      cfg.validate();
      run_ingest(cfg, err);
    } else if (sub == generate) {
      run_generate(cfg, gen, err);
    } else if (sub == annotation_request) {
      run_annotation_request(cfg, err);
    } else if (sub == featurize) {
      if (!annotations_path.empty()) cfg.paths.annotations = std::filesystem::absolute(annotations_path);
      run_featurize(cfg, err);
    } else if (sub == train) {
      if (!model_kind.empty()) {
        const auto kind = learners::parse_model_kind(model_kind);
        if (!kind) throw core::ConfigError("--model must be gbdt or mlp");
        cfg.learner = *kind;
      }
      if (!preset.empty()) cfg.preset = preset;
      cfg.validate();
      run_train(cfg, err);
    } else if (sub == evaluate) {
      run_evaluate(cfg, err);
    } else if (sub == quality) {
      if (!references_path.empty()) cfg.paths.references = std::filesystem::absolute(references_path);
      run_quality(cfg, err);
    } else if (sub == significance) {
      run_significance(cfg, sig, err);
    } else if (sub == report) {
      run_report(cfg, err);
    } else if (sub == all) {
      run_all(cfg, err);
    }
  } catch (const core::ConfigError& e) {
    err << "promptroute: [" << stage << "] config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const core::DataError& e) {
    err << "promptroute: [" << stage << "] data error: " << e.what() << '\n';
    return kExitData;
  } catch (const core::InputError& e) {
    err << "promptroute: [" << stage << "] input error: " << e.what() << '\n';
    return kExitData;
  } catch (const ingest::JoinError& e) {
    err << "promptroute: [" << stage << "] data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "promptroute: [" << stage << "] data error: " << e.what() << '\n';
    return kExitData;
  } catch (const StageFailure& e) {
    err << "promptroute: [" << stage << "] stage failed: " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    err << "promptroute: [" << stage << "] error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitOk;
}

}  // namespace promptroute::cli
