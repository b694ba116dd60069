#include "promptroute/annotations/store.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include "promptroute/core/hash.hpp"

namespace promptroute::annotations {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 17> kUpos{"ADJ",  "ADP",   "ADV",  "AUX",   "CCONJ", "DET",
                                                 "INTJ", "NOUN",  "NUM",  "PART",  "PRON",  "PROPN",
                                                 "PUNCT", "SCONJ", "SYM", "VERB",  "X"};

bool is_hex_key(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

class BundleReader {
 public:
  BundleReader(const json& j, std::size_t line, std::vector<core::Issue>& issues)
      : j_(j), line_(line), issues_(issues) {}

  void fail(const std::string& field, const std::string& msg) {
    issues_.push_back({line_, key_, field, msg});
  }

  void set_key(std::string key) { key_ = std::move(key); }

  bool present(const char* field) const { return j_.contains(field) && !j_[field].is_null(); }

  std::optional<std::int64_t> integer(const char* field) {
    if (!present(field)) return std::nullopt;
    if (!j_[field].is_number_integer()) {
      fail(field, "expected integer or null");
      return std::nullopt;
    }
    return j_[field].get<std::int64_t>();
  }

  std::optional<double> real(const char* field) {
    if (!present(field)) return std::nullopt;
    if (!j_[field].is_number()) {
      fail(field, "expected number or null");
      return std::nullopt;
    }
    return j_[field].get<double>();
  }

  std::optional<std::string> str(const char* field) {
    if (!present(field)) return std::nullopt;
    if (!j_[field].is_string()) {
      fail(field, "expected string or null");
      return std::nullopt;
    }
    return j_[field].get<std::string>();
  }

  std::optional<std::vector<std::string>> str_list(const char* field) {
    if (!present(field)) return std::nullopt;
    if (!j_[field].is_array() ||
        !std::all_of(j_[field].begin(), j_[field].end(), [](const json& v) { return v.is_string(); })) {
      fail(field, "expected array of strings or null");
      return std::nullopt;
    }
    return j_[field].get<std::vector<std::string>>();
  }

 private:
  const json& j_;
  std::size_t line_;
  std::vector<core::Issue>& issues_;
  std::string key_;
};

json opt(const auto& v) { return v ? json(*v) : json(nullptr); }

void check_cosine(const std::optional<double>& v, const char* field, const std::string& key,
                  std::size_t line, std::vector<core::Issue>& out) {
  if (v && !(std::isfinite(*v) && *v >= -1.0 && *v <= 1.0)) {
    out.push_back({line, key, field, "cosine " + json(*v).dump() + " outside [-1,1]"});
  }
}

std::string key_summary(const std::vector<core::Issue>& issues) {
  std::string msg;
  const std::size_t shown = std::min<std::size_t>(issues.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + issues[i].describe();
  if (issues.size() > shown) msg += "\n  ... " + std::to_string(issues.size() - shown) + " more";
  return msg;
}

}  // namespace

std::string_view to_string(PairKind k) {
  switch (k) {
    case PairKind::answer_response:
      return "answer_response";
    case PairKind::question_answer:
      return "question_answer";
    case PairKind::question_response:
      return "question_response";
  }
  return "?";
}

std::optional<PairKind> parse_pair_kind(std::string_view s) {
  for (PairKind k : {PairKind::answer_response, PairKind::question_answer, PairKind::question_response}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

json to_json(const AnnotationBundle& b) {
  json j;
  j["text_key"] = b.text_key;
  j["named_entity_count"] = opt(b.named_entity_count);
  j["pos_tags"] = opt(b.pos_tags);
  if (b.token_count) j["token_count"] = *b.token_count;
  j["syntactic_depth_max"] = opt(b.syntactic_depth_max);
  if (b.syntactic_depth_mean) j["syntactic_depth_mean"] = *b.syntactic_depth_mean;
  j["lang_detected"] = opt(b.lang_detected);
  j["lang_confidence"] = opt(b.lang_confidence);
  j["embed_sim_answer_response"] = opt(b.embed_sim_answer_response);
  j["embed_sim_question_answer"] = opt(b.embed_sim_question_answer);
  j["embed_sim_question_response"] = opt(b.embed_sim_question_response);
  return j;
}

std::vector<core::Issue> validate_bundle(const AnnotationBundle& b, std::size_t line) {
  std::vector<core::Issue> out;
  const auto add = [&](const char* field, std::string msg) {
    out.push_back({line, b.text_key, field, std::move(msg)});
  };
  if (!is_hex_key(b.text_key)) add("text_key", "expected 64 lowercase hex digits");
  if (b.named_entity_count && *b.named_entity_count < 0) add("named_entity_count", "negative count");
  if (b.pos_tags) {
    for (const auto& tag : *b.pos_tags) {
      if (std::find(kUpos.begin(), kUpos.end(), tag) == kUpos.end()) {
        add("pos_tags", "unknown tag '" + tag + "'");
        break;
      }
    }
  }
  if (b.token_count) {
    if (*b.token_count < 0) add("token_count", "negative count");
    if (b.pos_tags && static_cast<std::int64_t>(b.pos_tags->size()) != *b.token_count) {
      add("pos_tags", "length " + std::to_string(b.pos_tags->size()) + " != token_count " +
                          std::to_string(*b.token_count));
    }
  }
  if (b.syntactic_depth_max) {
    const bool has_tokens = (b.token_count && *b.token_count > 0) || (b.pos_tags && !b.pos_tags->empty());
    if (*b.syntactic_depth_max < 0) add("syntactic_depth_max", "negative depth");
    else if (has_tokens && *b.syntactic_depth_max < 1) add("syntactic_depth_max", "depth must be >= 1 when tokens exist");
  }
  if (b.syntactic_depth_mean && !(std::isfinite(*b.syntactic_depth_mean) && *b.syntactic_depth_mean >= 0)) {
    add("syntactic_depth_mean", "must be a finite nonnegative number");
  }
  if (b.lang_confidence && !(*b.lang_confidence >= 0.0 && *b.lang_confidence <= 1.0)) {
    add("lang_confidence", "probability " + json(*b.lang_confidence).dump() + " outside [0,1]");
  }
  if (b.lang_detected.has_value() != b.lang_confidence.has_value()) {
    add(b.lang_detected ? "lang_confidence" : "lang_detected",
        "lang_detected and lang_confidence must be both set or both null");
  }
  check_cosine(b.embed_sim_answer_response, "embed_sim_answer_response", b.text_key, line, out);
  check_cosine(b.embed_sim_question_answer, "embed_sim_question_answer", b.text_key, line, out);
  check_cosine(b.embed_sim_question_response, "embed_sim_question_response", b.text_key, line, out);
  return out;
}

AnnotationLoadError::AnnotationLoadError(const std::string& source, std::vector<core::Issue> issues)
    : core::DataError(source + ": " + std::to_string(issues.size()) + " annotation problem(s)" +
                      key_summary(issues)),
      issues_(std::move(issues)) {}

AnnotationStore::AnnotationStore(
    std::vector<AnnotationBundle> bundles,
    std::map<std::tuple<std::string, std::string, PairKind>, double> similarities,
    std::map<std::string, std::string> tools)
    : similarities_(std::move(similarities)), tools_(std::move(tools)) {
  std::vector<core::Issue> issues;
  for (auto& b : bundles) {
    auto problems = validate_bundle(b);
    issues.insert(issues.end(), problems.begin(), problems.end());
    const std::string key = b.text_key;
    if (!bundles_.emplace(key, std::move(b)).second) issues.push_back({0, key, "text_key", "duplicate key"});
  }
  for (const auto& [k, v] : similarities_) {
    if (!(std::isfinite(v) && v >= -1.0 && v <= 1.0)) {
      issues.push_back({0, std::get<0>(k), "cosine", "cosine outside [-1,1]"});
    }
  }
  if (!issues.empty()) throw AnnotationLoadError("annotation store", std::move(issues));
  coverage_.bundles = bundles_.size();
  coverage_.similarity_pairs = similarities_.size();
  for (const auto& [_, b] : bundles_) {
    coverage_.with_ner += b.named_entity_count.has_value();
    coverage_.with_pos += b.pos_tags.has_value();
    coverage_.with_depth += b.syntactic_depth_max.has_value();
    coverage_.with_langid += b.lang_detected.has_value();
  }
}

const AnnotationBundle* AnnotationStore::find(const std::string& text_key) const {
  auto it = bundles_.find(text_key);
  return it == bundles_.end() ? nullptr : &it->second;
}

std::optional<double> AnnotationStore::find_similarity(const std::string& key_a,
                                                       const std::string& key_b, PairKind kind) const {
  auto it = similarities_.find({key_a, key_b, kind});
  if (it == similarities_.end()) return std::nullopt;
  return it->second;
}

AnnotationStore load_annotations(std::istream& in, const std::string& source) {
  const core::JsonlDocument doc = core::read_jsonl(in, source);
  std::vector<core::Issue> issues = doc.issues;
  if (doc.header.contains("kind") && doc.header["kind"] != "annotations") {
    throw core::DataError(source + ": header kind " + doc.header["kind"].dump() + " is not \"annotations\"");
  }
  std::map<std::string, std::string> tools;
  if (doc.header.contains("tools")) {
    if (!doc.header["tools"].is_object()) throw core::DataError(source + ": header \"tools\" must be an object");
    for (const auto& [name, version] : doc.header["tools"].items()) {
      tools[name] = version.is_string() ? version.get<std::string>() : version.dump();
    }
  }

  std::vector<AnnotationBundle> bundles;
  std::map<std::tuple<std::string, std::string, PairKind>, double> sims;
  std::map<std::string, std::size_t> first_line;
  for (const auto& row : doc.rows) {
    const json& j = row.value;
    if (!j.is_object()) {
      issues.push_back({row.line, "", "", "line is not a JSON object"});
      continue;
    }
    const std::size_t before = issues.size();
    BundleReader r(j, row.line, issues);
    if (j.contains("pair")) {
      const json& p = j["pair"];
      const bool shape = p.is_object() && p.contains("a") && p["a"].is_string() && p.contains("b") &&
                         p["b"].is_string() && p.contains("kind") && p["kind"].is_string();
      if (!shape) {
        r.fail("pair", "expected {\"a\": key, \"b\": key, \"kind\": ...}");
        continue;
      }
      const auto kind = parse_pair_kind(p["kind"].get<std::string>());
      if (!kind) r.fail("pair.kind", "unknown pair kind " + p["kind"].dump());
      const auto cosine = r.real("cosine");
      if (!cosine) r.fail("cosine", "missing");
      const std::string a = p["a"].get<std::string>();
      const std::string b = p["b"].get<std::string>();
      if (!is_hex_key(a) || !is_hex_key(b)) r.fail("pair", "keys must be 64 lowercase hex digits");
      if (cosine && !(*cosine >= -1.0 && *cosine <= 1.0)) {
        r.fail("cosine", "cosine " + json(*cosine).dump() + " outside [-1,1]");
      }
      if (issues.size() == before && !sims.emplace(std::make_tuple(a, b, *kind), *cosine).second) {
        r.fail("pair", "duplicate pair");
      }
      continue;
    }

    AnnotationBundle b;
    if (!j.contains("text_key") || !j["text_key"].is_string()) {
      r.fail("text_key", "missing");
      continue;
    }
    b.text_key = j["text_key"].get<std::string>();
    r.set_key(b.text_key);
    b.named_entity_count = r.integer("named_entity_count");
    b.pos_tags = r.str_list("pos_tags");
    b.token_count = r.integer("token_count");
    b.syntactic_depth_max = r.integer("syntactic_depth_max");
    b.syntactic_depth_mean = r.real("syntactic_depth_mean");
    b.lang_detected = r.str("lang_detected");
    b.lang_confidence = r.real("lang_confidence");
    b.embed_sim_answer_response = r.real("embed_sim_answer_response");
    b.embed_sim_question_answer = r.real("embed_sim_question_answer");
    b.embed_sim_question_response = r.real("embed_sim_question_response");
    auto problems = validate_bundle(b, row.line);
    issues.insert(issues.end(), problems.begin(), problems.end());
    if (auto [it, fresh] = first_line.emplace(b.text_key, row.line); !fresh) {
      r.fail("text_key", "duplicate key (first seen on line " + std::to_string(it->second) + ")");
    }
    if (issues.size() == before) bundles.push_back(std::move(b));
  }
  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const core::Issue& a, const core::Issue& b) { return a.line < b.line; });
    throw AnnotationLoadError(source, std::move(issues));
  }
  return AnnotationStore(std::move(bundles), std::move(sims), std::move(tools));
}

AnnotationStore load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw core::InputError("cannot open " + path.string());
  return load_annotations(in, path.string());
}

void write_annotations(std::ostream& out, const AnnotationStore& store) {
  json header{{"schema", core::kSchemaVersion}, {"kind", "annotations"}, {"tools", store.tools()}};
  std::vector<json> rows;
  for (const auto& [_, b] : store.bundles()) rows.push_back(to_json(b));
  for (const auto& [k, v] : store.similarities()) {
    rows.push_back({{"pair", {{"a", std::get<0>(k)}, {"b", std::get<1>(k)}, {"kind", to_string(std::get<2>(k))}}},
                    {"cosine", v}});
  }
  core::write_jsonl(out, header, rows);
}

ResolvedAnnotation resolve(const AnnotationStore& store, std::string_view text) {
  ResolvedAnnotation out;
  const AnnotationBundle* b = store.find(core::text_key(text));
  if (b == nullptr) return out;
  if (b->named_entity_count) {
    out.named_entity_count = *b->named_entity_count;
    out.mask.ner = true;
  }
  if (b->pos_tags) {
    out.pos_tags = *b->pos_tags;
    out.mask.pos = true;
  }
  if (b->syntactic_depth_max) {
    out.syntactic_depth_max = *b->syntactic_depth_max;
    out.mask.depth = true;
  }
  if (b->lang_detected && b->lang_confidence) {
    out.lang_detected = *b->lang_detected;
    out.lang_confidence = *b->lang_confidence;
    out.mask.langid = true;
  }
  return out;
}

std::optional<double> resolve_similarity(const AnnotationStore& store, std::string_view a,
                                         std::string_view b, std::string_view response, PairKind kind) {
  if (a.empty() || b.empty()) return std::nullopt;
  if (auto v = store.find_similarity(core::text_key(a), core::text_key(b), kind)) return v;
  const AnnotationBundle* rb = store.find(core::text_key(response));
  if (rb == nullptr) return std::nullopt;
  switch (kind) {
    case PairKind::answer_response:
      return rb->embed_sim_answer_response;
    case PairKind::question_answer:
      return rb->embed_sim_question_answer;
    case PairKind::question_response:
      return rb->embed_sim_question_response;
  }
  return std::nullopt;
}

void AnnotationRequest::add_text(std::string_view text, const std::string& expected_language) {
  if (text.empty()) return;
  std::string key = core::text_key(text);
  if (!text_keys_.insert(key).second) return;
  texts_.push_back({std::move(key), std::string(text), expected_language});
}

void AnnotationRequest::add_pair(std::string_view a, std::string_view b, PairKind kind) {
  if (a.empty() || b.empty()) return;
  auto k = std::make_tuple(core::text_key(a), core::text_key(b), kind);
  if (!pair_keys_.insert(k).second) return;
  pairs_.push_back({std::get<0>(k), std::get<1>(k), kind});
}

void write_request(std::ostream& out, const AnnotationRequest& request) {
  std::vector<json> rows;
  for (const auto& t : request.texts()) {
    rows.push_back({{"text_key", t.text_key}, {"text", t.text}, {"expected_language", t.expected_language}});
  }
  for (const auto& p : request.pairs()) {
    rows.push_back({{"pair", {{"a", p.key_a}, {"b", p.key_b}, {"kind", to_string(p.kind)}}}});
  }
  core::write_jsonl(out, json{{"schema", core::kSchemaVersion}, {"kind", "annotation_request"}}, rows);
}

}  // namespace promptroute::annotations
