#include <fstream>
#include <ostream>

#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/parallel.hpp"
#include "promptroute/eval/report.hpp"
#include "promptroute/featurize/features.hpp"

namespace promptroute::eval {

using nlohmann::json;

RoutedPair make_routed(const core::InstancePair& pair, double p_translate) {
  RoutedPair r;
  r.id = pair.id;
  r.backbone = pair.backbone;
  r.dataset = pair.dataset;
  r.language = pair.language;
  r.native_correct = pair.native.is_correct.value_or(false);
  r.translate_correct = pair.translate.is_correct.value_or(false);
  r.native_unparsed = !pair.native.parsed_answer.has_value();
  r.translate_unparsed = !pair.translate.parsed_answer.has_value();
  r.label = pair.label;
  r.p_translate = p_translate;
  r.decision = learners::decide(p_translate) == 1 ? core::Route::translate : core::Route::native;
  return r;
}

std::vector<RoutedPair> route_with(std::span<const core::InstancePair> pairs,
                                   const std::function<double(const core::InstancePair&)>& p_translate,
                                   unsigned threads) {
  std::vector<RoutedPair> out(pairs.size());
  core::parallel_for(
      pairs.size(), [&](std::size_t i) { out[i] = make_routed(pairs[i], p_translate(pairs[i])); }, threads);
  return out;
}

std::vector<RoutedPair> route(const learners::TrainedModel& model, std::span<const core::InstancePair> pairs,
                              const featurize::FeatureEncoder& encoder,
                              const annotations::AnnotationStore& store, unsigned threads) {
  const auto names = featurize::feature_names(encoder);
  if (names != model.feature_names) {
    std::string msg = "model expects " + std::to_string(model.feature_names.size()) +
                      " features, encoder " + encoder.version() + " produces " + std::to_string(names.size());
    for (std::size_t i = 0; i < std::min(names.size(), model.feature_names.size()); ++i) {
      if (names[i] != model.feature_names[i]) {
        msg += "; first difference at column " + std::to_string(i) + " ('" + model.feature_names[i] +
               "' vs '" + names[i] + "')";
        break;
      }
    }
    throw EncoderMismatch(msg);
  }
  return route_with(
      pairs,
      [&](const core::InstancePair& p) {
        const auto v = featurize::featurize_pair(p, encoder, store);
        return learners::predict(model, v.values);
      },
      threads);
}

namespace {

json to_json(const RoutedPair& r) {
  return json{{"id", r.id},
              {"backbone", r.backbone},
              {"dataset", std::string(core::to_string(r.dataset))},
              {"language", r.language},
              {"native_correct", r.native_correct},
              {"translate_correct", r.translate_correct},
              {"native_unparsed", r.native_unparsed},
              {"translate_unparsed", r.translate_unparsed},
              {"label", r.label ? json(static_cast<int>(*r.label)) : json(nullptr)},
              {"p_translate", r.p_translate},
              {"decision", std::string(core::to_string(r.decision))}};
}

RoutedPair routed_from_json(const json& j) {
  RoutedPair r;
  r.id = j.at("id").get<std::string>();
  r.backbone = j.at("backbone").get<std::string>();
  const auto ds = core::parse_dataset(j.at("dataset").get<std::string>());
  if (!ds) throw core::DataError("unknown dataset " + j.at("dataset").dump());
  r.dataset = *ds;
  r.language = j.at("language").get<std::string>();
  r.native_correct = j.at("native_correct").get<bool>();
  r.translate_correct = j.at("translate_correct").get<bool>();
  r.native_unparsed = j.value("native_unparsed", false);
  r.translate_unparsed = j.value("translate_unparsed", false);
  if (j.contains("label") && !j["label"].is_null()) r.label = static_cast<core::Route>(j["label"].get<int>());
  r.p_translate = j.at("p_translate").get<double>();
  const auto d = core::parse_route(j.at("decision").get<std::string>());
  if (!d) throw core::DataError("unknown decision " + j.at("decision").dump());
  r.decision = *d;
  return r;
}

}  // namespace

void write_routed(std::ostream& out, std::span<const RoutedPair> routed) {
  std::vector<json> rows;
  rows.reserve(routed.size());
  for (const auto& r : routed) rows.push_back(to_json(r));
  core::write_jsonl(out, json{{"schema", core::kSchemaVersion}, {"kind", "routed"}}, rows);
}

void write_routed(const std::filesystem::path& path, std::span<const RoutedPair> routed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::InputError("cannot write " + path.string());
  write_routed(out, routed);
  if (!out) throw core::InputError("write failed: " + path.string());
}

std::vector<RoutedPair> read_routed(const std::filesystem::path& path) {
  const auto doc = core::read_jsonl(path);
  if (doc.header.value("kind", "") != "routed") throw core::DataError(path.string() + ": not a routed file");
  if (!doc.issues.empty()) throw core::DataError(path.string() + ": " + doc.issues.front().describe());
  std::vector<RoutedPair> out;
  out.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    try {
      out.push_back(routed_from_json(row.value));
    } catch (const json::exception& e) {
      throw core::DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
    } catch (const core::DataError& e) {
      throw core::DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace promptroute::eval
