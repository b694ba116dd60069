#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "promptroute/cli/config.hpp"
#include "promptroute/core/text.hpp"

namespace promptroute::cli {

namespace {

std::string_view mode_name(eval::WilcoxonMode m) {
  switch (m) {
    case eval::WilcoxonMode::automatic:
      return "auto";
    case eval::WilcoxonMode::exact:
      return "exact";
    case eval::WilcoxonMode::normal:
      return "normal";
  }
  return "?";
}

void reject_unknown(const toml::table& t, const std::string& where, std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : t) {
    if (std::find(known.begin(), known.end(), k.str()) == known.end()) {
      throw core::ConfigError("unknown config key " + (where.empty() ? "" : where + ".") + std::string(k.str()));
    }
  }
}

template <typename T>
T required_type(const toml::node_view<const toml::node>& node, const std::string& key, T fallback) {
  if (!node) return fallback;
  const auto v = node.value<T>();
  if (!v) throw core::ConfigError("config key " + key + " has the wrong type");
  return *v;
}

std::vector<std::string> string_list(const toml::node_view<const toml::node>& node, const std::string& key) {
  std::vector<std::string> out;
  if (!node) return out;
  if (const auto s = node.value<std::string>()) return {*s};
  const auto* arr = node.as_array();
  if (!arr) throw core::ConfigError("config key " + key + " must be a string or an array of strings");
  for (const auto& v : *arr) {
    const auto s = v.value<std::string>();
    if (!s) throw core::ConfigError("config key " + key + " must hold strings");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

std::filesystem::path PipelineConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir / p).lexically_normal();
}

nlohmann::json PipelineConfig::to_json() const {
  auto paths_of = [](const std::vector<std::filesystem::path>& v) {
    auto a = nlohmann::json::array();
    for (const auto& p : v) a.push_back(p.generic_string());
    return a;
  };
  nlohmann::json j;
  j["seed"] = seed;
  j["backbones"] = backbones;
  j["paths"] = {{"instances", paths.instances.generic_string()},
                {"endpoint", paths.endpoint.generic_string()},
                {"logs", paths_of(paths.logs)},
                {"annotations", paths.annotations ? nlohmann::json(paths.annotations->generic_string()) : nullptr},
                {"references", paths.references ? nlohmann::json(paths.references->generic_string()) : nullptr},
                {"scores", paths_of(paths.scores)},
                {"out", paths.out.generic_string()}};
  j["split"] = {{"train_fraction", split.train_fraction}, {"stratify", split.stratify_keys}};
  j["features"] = {{"tokenizer", featurize::to_string(features.tokenizer)},
                   {"rare_mode", featurize::to_string(features.rare_mode)},
                   {"rare_rank_threshold", features.rare_rank_threshold}};
  j["learner"] = {{"kind", learners::to_string(learner)}, {"preset", preset}};
  j["eval"] = {{"wilcoxon", mode_name(wilcoxon)}};
  auto metric_names = nlohmann::json::array();
  for (const auto m : metrics) metric_names.push_back(quality::to_string(m));
  j["quality"] = {{"metrics", metric_names}, {"per_language", per_language}};
  auto strategy_names = nlohmann::json::array();
  for (const auto s : strategies) strategy_names.push_back(core::to_string(s));
  j["generate"] = {{"strategies", strategy_names}, {"in_all", generate_in_all}};
  // threads is left out: it never changes outputs
  return j;
}

void PipelineConfig::validate() const {
  split.validate();
  if (paths.out.empty()) throw core::ConfigError("paths.out must not be empty");
  if (preset != "auto" && preset != "default" && preset != "ds" && preset != "llama") {
    throw core::ConfigError("learner.preset must be auto, default, ds or llama");
  }
  if (metrics.empty()) throw core::ConfigError("quality.metrics must not be empty");
  if (strategies.empty()) throw core::ConfigError("generate.strategies must not be empty");
  if (features.rare_rank_threshold == 0) throw core::ConfigError("features.rare_rank_threshold must be >= 1");
}

std::vector<core::Strategy> parse_strategies(std::string_view csv) {
  std::vector<core::Strategy> out;
  std::string item;
  std::istringstream in{std::string(csv)};
  while (std::getline(in, item, ',')) {
    const auto name = core::to_lower_ascii(core::trim_ascii(item));
    if (name.empty()) continue;
    const auto s = core::parse_strategy(name);
    if (!s) throw core::ConfigError("unknown strategy '" + name + "'");
    if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
  }
  if (out.empty()) throw core::ConfigError("no strategies given");
  return out;
}

PipelineConfig pipeline_config_from_toml(std::string_view text, const std::string& source,
                                         const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw core::ConfigError(source + ": " + std::string(e.description()));
  }
  PipelineConfig c;
  c.base_dir = base_dir;
  try {
    reject_unknown(root, "",
                   {"seed", "threads", "backbones", "paths", "split", "features", "learner", "eval", "quality",
                    "generate", "endpoint"});
    const toml::table& r = root;
    const auto seed = required_type<std::int64_t>(r["seed"], "seed", 0);
    if (seed < 0) throw core::ConfigError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    const auto threads = required_type<std::int64_t>(r["threads"], "threads", 0);
    if (threads < 0) throw core::ConfigError("threads must be >= 0");
    c.threads = static_cast<unsigned>(threads);
    c.backbones = string_list(r["backbones"], "backbones");

    if (const auto* p = r["paths"].as_table()) {
      reject_unknown(*p, "paths", {"instances", "endpoint", "logs", "annotations", "references", "scores", "out"});
      const toml::table& t = *p;
      c.paths.instances = required_type<std::string>(t["instances"], "paths.instances", "");
      c.paths.endpoint = required_type<std::string>(t["endpoint"], "paths.endpoint", "");
      for (const auto& s : string_list(t["logs"], "paths.logs")) c.paths.logs.emplace_back(s);
      if (t["annotations"]) c.paths.annotations = required_type<std::string>(t["annotations"], "paths.annotations", "");
      if (t["references"]) c.paths.references = required_type<std::string>(t["references"], "paths.references", "");
      for (const auto& s : string_list(t["scores"], "paths.scores")) c.paths.scores.emplace_back(s);
      c.paths.out = required_type<std::string>(t["out"], "paths.out", "out");
    }
    if (const auto* s = r["split"].as_table()) {
      reject_unknown(*s, "split", {"train_fraction", "stratify"});
      const toml::table& t = *s;
      c.split.train_fraction = required_type<double>(t["train_fraction"], "split.train_fraction", 0.10);
      if (t["stratify"]) c.split.stratify_keys = string_list(t["stratify"], "split.stratify");
    }
    if (const auto* f = r["features"].as_table()) {
      reject_unknown(*f, "features", {"tokenizer", "rare_mode", "rare_rank_threshold"});
      const toml::table& t = *f;
      const auto tok = required_type<std::string>(t["tokenizer"], "features.tokenizer", "whitespace");
      if (tok == "whitespace") {
        c.features.tokenizer = featurize::Tokenizer::whitespace;
      } else if (tok == "icu") {
        c.features.tokenizer = featurize::Tokenizer::icu;
      } else {
        throw core::ConfigError("features.tokenizer must be whitespace or icu");
      }
      const auto mode = required_type<std::string>(t["rare_mode"], "features.rare_mode", "rank");
      if (mode == "rank") {
        c.features.rare_mode = featurize::RareMode::rank;
      } else if (mode == "median") {
        c.features.rare_mode = featurize::RareMode::median;
      } else {
        throw core::ConfigError("features.rare_mode must be rank or median");
      }
      const auto threshold = required_type<std::int64_t>(t["rare_rank_threshold"], "features.rare_rank_threshold",
                                                         static_cast<std::int64_t>(c.features.rare_rank_threshold));
      if (threshold < 1) throw core::ConfigError("features.rare_rank_threshold must be >= 1");
      c.features.rare_rank_threshold = static_cast<std::size_t>(threshold);
    }
    if (const auto* l = r["learner"].as_table()) {
      reject_unknown(*l, "learner", {"kind", "preset"});
      const toml::table& t = *l;
      const auto kind = required_type<std::string>(t["kind"], "learner.kind", "gbdt");
      const auto parsed = learners::parse_model_kind(kind);
      if (!parsed) throw core::ConfigError("learner.kind must be gbdt or mlp");
      c.learner = *parsed;
      c.preset = required_type<std::string>(t["preset"], "learner.preset", "auto");
    }
    if (const auto* e = r["eval"].as_table()) {
      reject_unknown(*e, "eval", {"wilcoxon"});
      const toml::table& t = *e;
      const auto mode = eval::parse_wilcoxon_mode(required_type<std::string>(t["wilcoxon"], "eval.wilcoxon", "auto"));
      if (!mode) throw core::ConfigError("eval.wilcoxon must be auto, exact or normal");
      c.wilcoxon = *mode;
    }
    if (const auto* q = r["quality"].as_table()) {
      reject_unknown(*q, "quality", {"metrics", "per_language"});
      const toml::table& t = *q;
      if (t["metrics"]) {
        c.metrics.clear();
        for (const auto& s : string_list(t["metrics"], "quality.metrics")) {
          const auto m = quality::parse_metric(s);
          if (!m) throw core::ConfigError("unknown quality metric '" + s + "'");
          if (std::find(c.metrics.begin(), c.metrics.end(), *m) == c.metrics.end()) c.metrics.push_back(*m);
        }
      }
      c.per_language = required_type<bool>(t["per_language"], "quality.per_language", false);
    }
    if (const auto* g = r["generate"].as_table()) {
      reject_unknown(*g, "generate", {"strategies", "in_all"});
      const toml::table& t = *g;
      if (t["strategies"]) {
        std::string joined;
        for (const auto& s : string_list(t["strategies"], "generate.strategies")) joined += s + ",";
        c.strategies = parse_strategies(joined);
      }
      c.generate_in_all = required_type<bool>(t["in_all"], "generate.in_all", false);
    }
    // an [endpoint] table in the pipeline config itself serves generate
    if (c.paths.endpoint.empty() && r["endpoint"].is_table()) {
      c.paths.endpoint = std::filesystem::path(source).filename();
    }
  } catch (const core::ConfigError& e) {
    throw core::ConfigError(source + ": " + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return pipeline_config_from_toml(ss.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

learners::GbdtConfig gbdt_config_for(const PipelineConfig& c, const std::string& backbone) {
  learners::GbdtConfig g;
  if (c.preset == "ds" || c.preset == "llama") {
    g = learners::gbdt_preset(c.preset);
  } else if (c.preset == "auto" && (backbone == "ds" || backbone == "llama")) {
    g = learners::gbdt_preset(backbone);
  }
  g.seed = c.seed;
  return g;
}

learners::MlpConfig mlp_config_for(const PipelineConfig& c, const std::string& backbone) {
  learners::MlpConfig m;
  if (c.preset == "ds" || c.preset == "llama") {
    m = learners::mlp_preset(c.preset);
  } else if (c.preset == "auto" && (backbone == "ds" || backbone == "llama")) {
    m = learners::mlp_preset(backbone);
  }
  m.seed = c.seed;
  return m;
}

}  // namespace promptroute::cli
