#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "promptroute/annotations/store.hpp"
#include "promptroute/cli/app.hpp"
#include "promptroute/cli/artifacts.hpp"
#include "promptroute/core/format.hpp"
#include "promptroute/core/jsonl.hpp"
#include "promptroute/eval/report.hpp"
#include "promptroute/featurize/features.hpp"
#include "promptroute/ingest/ingest.hpp"
#include "promptroute/learners/model.hpp"
#include "promptroute/promptgen/client.hpp"
#include "promptroute/quality/quality.hpp"

namespace promptroute::cli {

namespace fs = std::filesystem;

namespace {

// A referenced input that does not exist is a configuration problem.
void require_file(const fs::path& p, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw core::ConfigError(what + " not found: " + p.string());
}

void check_backbone_name(const std::string& b) {
  if (b.empty() || b == "." || b == ".." || b.find_first_of("/\\") != std::string::npos) {
    throw core::DataError("backbone '" + b + "' cannot name an output directory");
  }
}

struct SplitPairs {
  std::vector<std::string> backbones;  // sorted
  std::map<std::string, std::vector<core::InstancePair>> train;
  std::map<std::string, std::vector<core::InstancePair>> eval;
};

// pairs.jsonl and split.json from the ingest stage.
SplitPairs load_split(const PipelineConfig& cfg, StageWriter* w) {
  const auto pairs_path = cfg.out_dir() / "pairs.jsonl";
  const auto split_path = cfg.out_dir() / "split.json";
  require_file(pairs_path, "pairs (run ingest first)");
  require_file(split_path, "split manifest (run ingest first)");
  if (w) {
    w->add_input(pairs_path);
    w->add_input(split_path);
  }
  const auto pairs = core::read_pairs(pairs_path);
  nlohmann::json split;
  try {
    std::ifstream in(split_path, std::ios::binary);
    split = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw core::DataError(split_path.string() + ": " + e.what());
  }
  const auto& assign = split.at("assignments");
  SplitPairs out;
  std::set<std::string> backbones;
  for (const auto& p : pairs) {
    const auto it = assign.find(p.key());
    if (it == assign.end()) throw core::DataError(split_path.string() + ": no assignment for " + p.key());
    const auto side = it->get<std::string>();
    if (side == "train") {
      out.train[p.backbone].push_back(p);
    } else if (side == "eval") {
      out.eval[p.backbone].push_back(p);
    } else {
      throw core::DataError(split_path.string() + ": bad assignment '" + side + "' for " + p.key());
    }
    backbones.insert(p.backbone);
  }
  out.backbones.assign(backbones.begin(), backbones.end());
  for (const auto& b : out.backbones) check_backbone_name(b);
  return out;
}

annotations::AnnotationStore load_store(const PipelineConfig& cfg, StageWriter* w, std::ostream& log) {
  if (!cfg.paths.annotations) {
    log << "[featurize] no annotation file configured; annotation features are masked\n";
    return {};
  }
  const auto path = cfg.resolve(*cfg.paths.annotations);
  require_file(path, "annotation file");
  if (w) w->add_input(path);
  auto store = annotations::load_annotations(path);
  const auto& c = store.coverage();
  log << "[featurize] annotations: " << c.bundles << " bundles, " << c.similarity_pairs << " similarity pairs (ner "
      << c.with_ner << ", pos " << c.with_pos << ", depth " << c.with_depth << ", langid " << c.with_langid << ")\n";
  return store;
}

void write_text(StageWriter& w, const fs::path& rel, const std::string& text) {
  w.write(rel, [&](std::ostream& out) { out << text; });
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void run_generate(const PipelineConfig& cfg, const GenerateArgs& args, std::ostream& log) {
  const fs::path instances_path = args.dataset.empty() ? cfg.resolve(cfg.paths.instances) : fs::path(args.dataset);
  if (instances_path.empty()) throw core::ConfigError("no instance file: set paths.instances or pass --dataset");
  require_file(instances_path, "instance file");
  const fs::path endpoint_path = args.endpoint.empty() ? cfg.resolve(cfg.paths.endpoint) : fs::path(args.endpoint);
  if (endpoint_path.empty()) throw core::ConfigError("no endpoint config: set paths.endpoint or pass --endpoint");
  require_file(endpoint_path, "endpoint config");
  const auto strategies = args.strategies.empty() ? cfg.strategies : parse_strategies(args.strategies);
  const auto endpoint = promptgen::load_endpoint_config(endpoint_path);
  const auto assets = args.assets.empty() ? promptgen::TemplateSet::default_dir() : fs::path(args.assets);
  const auto templates = promptgen::TemplateSet::load(assets);
  const auto instances = promptgen::read_instances(instances_path);
  if (!endpoint.api_key_env.empty() && std::getenv(endpoint.api_key_env.c_str()) == nullptr) {
    log << "[generate] warning: " << endpoint.api_key_env << " is not set; sending no Authorization header\n";
  }
  const promptgen::ChatClient client(endpoint);
  const auto result = promptgen::generate(instances, strategies, templates, client);
  log << "[generate] " << result.stats.records << " records, " << result.stats.failed << " failed after retries\n";
  if (result.stats.route_unparsed > 0) {
    log << "[generate] warning: " << result.stats.route_unparsed
        << " routing decisions unparseable; defaulted to native\n";
  }
  if (result.stats.records > 0 && result.stats.failed == result.stats.records) {
    throw StageFailure("every request failed; last endpoint " + endpoint.base_url);
  }
  StageWriter w("generate", cfg.out_dir());
  w.add_input(instances_path);
  w.add_input(endpoint_path);
  const fs::path out =
      args.out.empty() ? fs::path("logs") / (endpoint.backbone_name() + ".jsonl") : fs::absolute(args.out);
  w.write(out, [&](std::ostream& o) { core::write_log(o, result.records); });
  auto snapshot = cfg.to_json();
  snapshot["endpoint"] = {{"base_url", endpoint.base_url},    {"model", endpoint.model},
                          {"backbone", endpoint.backbone_name()}, {"temperature", endpoint.temperature},
                          {"max_tokens", endpoint.max_tokens}, {"max_retries", endpoint.max_retries},
                          {"extra_body", endpoint.extra_body}};
  w.commit(snapshot, {{"stats",
                       {{"records", result.stats.records},
                        {"failed", result.stats.failed},
                        {"route_native", result.stats.route_native},
                        {"route_translate", result.stats.route_translate},
                        {"route_unparsed", result.stats.route_unparsed}}}});
}

void run_ingest(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.paths.logs.empty()) throw core::ConfigError("paths.logs is empty");
  StageWriter w("ingest", cfg.out_dir());
  std::vector<core::ResponseRecord> records;
  for (const auto& rel : cfg.paths.logs) {
    const auto path = cfg.resolve(rel);
    require_file(path, "response log");
    w.add_input(path);
    auto got = core::read_log(path);
    if (!got.issues.empty()) {
      std::string msg = path.string() + ": " + std::to_string(got.issues.size()) + " invalid record(s)";
      for (std::size_t i = 0; i < std::min<std::size_t>(5, got.issues.size()); ++i) {
        msg += "\n  " + got.issues[i].describe();
      }
      throw core::DataError(msg);
    }
    for (auto& r : got.records) {
      if (!cfg.backbones.empty() &&
          std::find(cfg.backbones.begin(), cfg.backbones.end(), r.backbone) == cfg.backbones.end()) {
        continue;
      }
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) throw core::DataError("no response records after the backbone filter");
  const auto stats = ingest::parse_and_score(records);
  std::vector<core::InstancePair> pairs;
  try {
    pairs = ingest::build_pairs_and_labels(records);
  } catch (const ingest::JoinError& e) {
    throw core::DataError(e.what());
  }
  if (pairs.empty()) throw core::DataError("no native/translate pairs in the logs");

  std::map<std::string, std::vector<core::InstancePair>> by_backbone;
  for (const auto& p : pairs) by_backbone[p.backbone].push_back(p);
  ingest::SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  nlohmann::json assignments = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [backbone, group] : by_backbone) {
    check_backbone_name(backbone);
    // one split per backbone: each classifier sees its own 10%
    const auto s = ingest::split(group, spec);
    std::size_t labeled_train = 0;
    for (const auto& p : s.train) {
      assignments[p.key()] = "train";
      labeled_train += p.label.has_value();
    }
    for (const auto& p : s.eval) assignments[p.key()] = "eval";
    counts[backbone] = {{"pairs", group.size()},
                        {"train", s.train.size()},
                        {"eval", s.eval.size()},
                        {"labeled_train", labeled_train}};
    log << "[ingest] " << backbone << ": " << group.size() << " pairs, " << s.train.size() << " train ("
        << labeled_train << " labeled), " << s.eval.size() << " eval\n";
  }
  log << "[ingest] " << stats.records << " records, " << stats.unparsed << " unparsed, " << stats.generation_failed
      << " generation failures\n";
  const nlohmann::json split = {{"schema", core::kSchemaVersion}, {"kind", "split"},
                                {"seed", cfg.seed},             {"train_fraction", spec.train_fraction},
                                {"stratify", spec.stratify_keys}, {"counts", counts},
                                {"assignments", assignments}};
  w.write("pairs.jsonl", [&](std::ostream& o) { core::write_pairs(o, pairs); });
  write_text(w, "split.json", split.dump(2) + "\n");
  w.commit(cfg.to_json(), {{"stats",
                            {{"records", stats.records},
                             {"unparsed", stats.unparsed},
                             {"generation_failed", stats.generation_failed},
                             {"pairs", pairs.size()}}}});
}

void run_annotation_request(const PipelineConfig& cfg, std::ostream& log) {
  StageWriter w("annotation-request", cfg.out_dir());
  const auto pairs_path = cfg.out_dir() / "pairs.jsonl";
  require_file(pairs_path, "pairs (run ingest first)");
  w.add_input(pairs_path);
  const auto pairs = core::read_pairs(pairs_path);
  const auto request = featurize::build_annotation_request(pairs);
  log << "[annotation-request] " << request.texts().size() << " texts, " << request.pairs().size() << " pairs\n";
  w.write("annotation_request.jsonl", [&](std::ostream& o) { annotations::write_request(o, request); });
  w.commit(cfg.to_json());
}

void run_featurize(const PipelineConfig& cfg, std::ostream& log) {
  StageWriter w("featurize", cfg.out_dir());
  const auto split = load_split(cfg, &w);
  const auto store = load_store(cfg, &w, log);
  nlohmann::json versions = nlohmann::json::object();
  for (const auto& backbone : split.backbones) {
    const auto train_it = split.train.find(backbone);
    if (train_it == split.train.end() || train_it->second.empty()) {
      throw core::DataError(backbone + ": no training pairs; raise split.train_fraction");
    }
    const auto encoder = featurize::FeatureEncoder::fit(train_it->second, cfg.features);
    static const std::vector<core::InstancePair> none;
    const auto eval_it = split.eval.find(backbone);
    const auto& eval_pairs = eval_it == split.eval.end() ? none : eval_it->second;
    const auto train = featurize::featurize_all(train_it->second, encoder, store, cfg.threads);
    const auto eval = featurize::featurize_all(eval_pairs, encoder, store, cfg.threads);
    log << "[featurize] " << backbone << ": " << train.names.size() << " features, " << train.size() << " train rows, "
        << eval.size() << " eval rows, encoder " << encoder.version() << "\n";
    const fs::path dir = backbone;
    write_text(w, dir / "encoder.json", encoder.to_json().dump() + "\n");
    w.write(dir / "features_train.csv",
            [&](std::ostream& o) { featurize::write_matrix(o, train, featurize::MatrixFormat::csv); });
    w.write(dir / "features_eval.csv",
            [&](std::ostream& o) { featurize::write_matrix(o, eval, featurize::MatrixFormat::csv); });
    versions[backbone] = encoder.version();
  }
  w.commit(cfg.to_json(), {{"encoder_versions", versions}});
}

void run_train(const PipelineConfig& cfg, std::ostream& log) {
  StageWriter w("train", cfg.out_dir());
  const auto split = load_split(cfg, nullptr);
  for (const auto& backbone : split.backbones) {
    const auto path = cfg.out_dir() / backbone / "features_train.csv";
    require_file(path, "training features (run featurize first)");
    w.add_input(path);
    const auto m = featurize::read_matrix(path, featurize::MatrixFormat::csv);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m.labels[i]) continue;
      X.push_back(m.rows[i]);
      y.push_back(static_cast<int>(*m.labels[i]));
    }
    learners::TrainedModel model;
    if (cfg.learner == learners::ModelKind::gbdt) {
      model = learners::train_gbdt(X, y, gbdt_config_for(cfg, backbone), m.names);
      model.importance = learners::feature_importance(model);
    } else {
      model = learners::train_mlp(X, y, mlp_config_for(cfg, backbone), m.names);
      // permutation importance on the training rows; eval labels stay unseen
      model.importance = learners::feature_importance(model, X, y, 5, cfg.seed);
    }
    model.metadata["backbone"] = backbone;
    model.metadata["encoder_version"] = m.encoder_version;
    model.metadata["train_rows"] = X.size();
    const auto translate_share =
        X.empty() ? 0.0 : static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(X.size());
    log << "[train] " << backbone << ": " << learners::to_string(cfg.learner) << " on " << X.size()
        << " labeled rows (" << eval::format_percent(translate_share) << "% translate)\n";
    const fs::path dir = backbone;
    w.write(dir / "model.json", [&](std::ostream& o) { learners::save_model(o, model); });
    w.write(dir / "importance.csv", [&](std::ostream& o) {
      o << "feature,group,importance\n";
      for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
        o << core::csv_field(model.feature_names[i]) << ',' << featurize::feature_group(model.feature_names[i]) << ','
          << core::shortest(model.importance[i]) << '\n';
      }
    });
  }
  w.commit(cfg.to_json());
}

void run_evaluate(const PipelineConfig& cfg, std::ostream& log) {
  StageWriter w("evaluate", cfg.out_dir());
  const auto split = load_split(cfg, &w);
  std::vector<eval::RoutedPair> routed;
  for (const auto& backbone : split.backbones) {
    const auto model_path = cfg.out_dir() / backbone / "model.json";
    const auto features_path = cfg.out_dir() / backbone / "features_eval.csv";
    require_file(model_path, "model (run train first)");
    require_file(features_path, "eval features (run featurize first)");
    w.add_input(model_path);
    w.add_input(features_path);
    const auto model = learners::load_model(model_path);
    const auto m = featurize::read_matrix(features_path, featurize::MatrixFormat::csv);
    if (model.feature_names != m.names) {
      throw eval::EncoderMismatch(backbone + ": model features differ from " + features_path.string());
    }
    if (model.metadata.value("encoder_version", "") != m.encoder_version) {
      throw eval::EncoderMismatch(backbone + ": model trained with encoder " +
                                  model.metadata.value("encoder_version", "?") + ", features use " +
                                  m.encoder_version);
    }
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < m.keys.size(); ++i) row_of[m.keys[i]] = i;
    const auto it = split.eval.find(backbone);
    if (it == split.eval.end()) continue;
    for (const auto& p : it->second) {
      const auto r = row_of.find(p.key());
      if (r == row_of.end()) throw core::DataError(features_path.string() + ": no row for " + p.key());
      routed.push_back(eval::make_routed(p, learners::predict(model, m.rows[r->second])));
    }
  }
  if (routed.empty()) throw core::DataError("no eval pairs to evaluate");
  const auto report = eval::build_report(routed, cfg.wilcoxon);
  for (const auto& b : report.backbones) {
    log << "[evaluate] " << b.backbone << ": native " << eval::format_percent(b.average.native) << ", translate "
        << eval::format_percent(b.average.translate) << ", classifier " << eval::format_percent(b.average.classifier)
        << ", oracle " << eval::format_percent(b.average.oracle) << " (unweighted over " << b.average.cells
        << " cells)\n";
  }
  w.write("routed.jsonl", [&](std::ostream& o) { eval::write_routed(o, routed); });
  w.write("report.csv", [&](std::ostream& o) { eval::write_report_csv(o, report); });
  w.write("accuracy.csv", [&](std::ostream& o) { eval::write_accuracy_csv(o, report); });
  w.write("significance.csv", [&](std::ostream& o) { eval::write_significance_csv(o, report.significance); });
  w.write("report.md", [&](std::ostream& o) { eval::write_report_markdown(o, report); });
  w.commit(cfg.to_json());
}

void run_quality(const PipelineConfig& cfg, std::ostream& log) {
  if (!cfg.paths.references) throw core::ConfigError("paths.references is not set");
  StageWriter w("quality", cfg.out_dir());
  const auto refs_path = cfg.resolve(*cfg.paths.references);
  require_file(refs_path, "reference file");
  const auto routed_path = cfg.out_dir() / "routed.jsonl";
  require_file(routed_path, "routed pairs (run evaluate first)");
  w.add_input(refs_path);
  w.add_input(routed_path);
  const auto split = load_split(cfg, &w);
  std::vector<core::InstancePair> eval_pairs;
  for (const auto& [b, v] : split.eval) eval_pairs.insert(eval_pairs.end(), v.begin(), v.end());
  const auto refs = quality::read_references(refs_path);
  const auto routed = eval::read_routed(routed_path);

  quality::ScoreTable table;
  const bool want_chrf = std::find(cfg.metrics.begin(), cfg.metrics.end(), quality::Metric::chrf) != cfg.metrics.end();
  if (want_chrf) {
    const auto run = quality::score_chrf(eval_pairs, refs, table, cfg.threads);
    log << "[quality] chrf: " << run.scored << " scored, " << run.excluded << " without extractable translation, "
        << run.no_reference << " without reference\n";
  }
  for (const auto& rel : cfg.paths.scores) {
    const auto path = cfg.resolve(rel);
    require_file(path, "score file");
    w.add_input(path);
    const auto n = quality::ingest_scores(path, eval_pairs, table);
    log << "[quality] " << path.string() << ": " << n << " scores\n";
  }

  std::vector<quality::PercentileTable> tables;
  std::vector<quality::ResourceBins> bins;
  for (const auto metric : cfg.metrics) {
    std::vector<eval::RoutedPair> scored;
    for (const auto& r : routed) {
      if (table.get(r.key(), metric)) scored.push_back(r);
    }
    if (scored.empty()) {
      log << "[quality] warning: no " << quality::to_string(metric) << " scores; skipped\n";
      continue;
    }
    if (scored.size() < routed.size()) {
      log << "[quality] " << quality::to_string(metric) << ": " << routed.size() - scored.size()
          << " routed pairs without a score are left out\n";
    }
    auto t = quality::percentile_tables(scored, table, metric, cfg.per_language);
    tables.insert(tables.end(), t.begin(), t.end());
    std::map<std::pair<std::string, core::Dataset>, std::vector<eval::RoutedPair>> groups;
    for (const auto& r : scored) groups[{r.backbone, r.dataset}].push_back(r);
    for (const auto& [key, group] : groups) {
      auto b = quality::resource_bin_distribution(group, table, metric);
      if (!b.levels.empty()) bins.push_back(std::move(b));
    }
  }
  if (tables.empty()) throw core::DataError("no quality scores for any configured metric");
  w.write("quality/scores.csv", [&](std::ostream& o) { quality::write_scores(o, table); });
  w.write("quality/percentiles.csv", [&](std::ostream& o) { quality::write_percentile_csv(o, tables); });
  w.write("quality/percentiles.md", [&](std::ostream& o) { quality::write_percentile_markdown(o, tables); });
  w.write("quality/resource_bins.csv", [&](std::ostream& o) { quality::write_resource_bins_csv(o, bins); });
  w.commit(cfg.to_json());
}

void run_significance(const PipelineConfig& cfg, const SignificanceArgs& args, std::ostream& log) {
  const fs::path acc = args.accuracy.empty() ? cfg.out_dir() / "accuracy.csv" : fs::path(args.accuracy);
  require_file(acc, "accuracy table");
  StageWriter w("significance", cfg.out_dir());
  w.add_input(acc);
  const auto rows = eval::read_accuracy_table(acc);
  std::set<std::string> backbones;
  std::map<std::string, std::set<std::string>> methods;
  for (const auto& r : rows) {
    backbones.insert(r.backbone);
    methods[r.backbone].insert(r.method);
  }
  std::vector<std::pair<std::string, std::string>> requested;
  for (const auto& c : args.compare) {
    const auto colon = c.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == c.size()) {
      throw core::ConfigError("--compare expects method_a:method_b, got '" + c + "'");
    }
    requested.emplace_back(c.substr(0, colon), c.substr(colon + 1));
  }
  std::vector<eval::Comparison> results;
  for (const auto& b : backbones) {
    if (!args.backbones.empty() && std::find(args.backbones.begin(), args.backbones.end(), b) == args.backbones.end()) {
      continue;
    }
    auto comparisons = requested;
    if (comparisons.empty()) {
      // every learned router against each fixed strategy
      for (const auto& fixed : {"translate", "native"}) {
        for (const auto& m : methods[b]) {
          if (m != "native" && m != "translate" && m != "oracle" && methods[b].count(fixed)) {
            comparisons.emplace_back(m, fixed);
          }
        }
      }
    }
    for (const auto& [a, bm] : comparisons) {
      if (!methods[b].count(a) || !methods[b].count(bm)) {
        throw core::DataError(acc.string() + ": backbone " + b + " lacks method " + (methods[b].count(a) ? bm : a));
      }
      results.push_back({b, a + " vs " + bm, eval::compare_methods(rows, b, a, bm, cfg.wilcoxon)});
    }
  }
  if (results.empty()) throw core::DataError(acc.string() + ": no comparable method pairs");
  for (const auto& r : results) {
    log << "[significance] " << r.backbone << " " << r.name << ": W=" << core::shortest(r.result.W)
        << " n=" << r.result.n_eff << " p=" << eval::format_p(r.result.p) << " (" << eval::to_string(r.result.method)
        << ")\n";
  }
  w.write(args.out, [&](std::ostream& o) { eval::write_significance_csv(o, results); });
  w.commit(cfg.to_json());
}

void run_report(const PipelineConfig& cfg, std::ostream& log) {
  StageWriter w("report", cfg.out_dir());
  const auto routed_path = cfg.out_dir() / "routed.jsonl";
  require_file(routed_path, "routed pairs (run evaluate first)");
  w.add_input(routed_path);
  const auto routed = eval::read_routed(routed_path);
  const auto report = eval::build_report(routed, cfg.wilcoxon);

  std::ostringstream md;
  md << "# Routing report\n\n";
  eval::write_report_markdown(md, report);

  std::set<std::string> backbones;
  for (const auto& r : routed) backbones.insert(r.backbone);
  bool importance_header = false;
  for (const auto& b : backbones) {
    const auto model_path = cfg.out_dir() / b / "model.json";
    std::error_code ec;
    if (!fs::is_regular_file(model_path, ec)) continue;
    w.add_input(model_path);
    const auto model = learners::load_model(model_path);
    if (model.importance.empty()) continue;
    if (!importance_header) {
      md << "\n## Feature importance by group (%)\n\n| Backbone | Learner | Group | Importance |\n|---|---|---|---|\n";
      importance_header = true;
    }
    for (const auto& [group, score] : learners::group_importance(model, featurize::feature_group)) {
      md << "| " << b << " | " << learners::to_string(model.kind) << " | " << group << " | "
         << eval::format_percent(score) << " |\n";
    }
  }
  const auto quality_md = cfg.out_dir() / "quality" / "percentiles.md";
  std::error_code ec;
  if (fs::is_regular_file(quality_md, ec)) {
    w.add_input(quality_md);
    md << "\n## Translation quality percentiles\n\n" << read_text(quality_md);
  }
  log << "[report] " << report.cells.size() << " cells, " << report.significance.size() << " comparisons\n";
  write_text(w, "REPORT.md", md.str());
  w.commit(cfg.to_json());
}

void run_all(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.generate_in_all) run_generate(cfg, {}, log);
  run_ingest(cfg, log);
  run_featurize(cfg, log);
  run_train(cfg, log);
  run_evaluate(cfg, log);
  if (cfg.paths.references) run_quality(cfg, log);
  run_report(cfg, log);
}

}  // namespace promptroute::cli
