#include "promptroute/core/jsonl.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "promptroute/core/errors.hpp"

namespace promptroute::core {

using nlohmann::json;

std::string Issue::describe() const {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  if (!id.empty()) os << "id '" << id << "': ";
  if (!field.empty()) os << field << ": ";
  os << message;
  return os.str();
}

JsonlDocument read_jsonl(std::istream& in, const std::string& source) {
  if (!in) throw InputError("cannot read " + source);
  JsonlDocument doc;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json value;
    try {
      value = json::parse(line);
    } catch (const json::parse_error& e) {
      if (!have_header) throw DataError(source + ": header line is not JSON");
      doc.issues.push_back({lineno, "", "", std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!have_header) {
      if (!value.is_object() || !value.contains("schema")) {
        throw DataError(source + ": first line must be a header object with \"schema\"");
      }
      if (!value["schema"].is_number_integer() || value["schema"].get<int>() != kSchemaVersion) {
        throw DataError(source + ": schema mismatch (expected " + std::to_string(kSchemaVersion) +
                        ", found " + value["schema"].dump() + ")");
      }
      doc.header = std::move(value);
      have_header = true;
      continue;
    }
    doc.rows.push_back({lineno, std::move(value)});
  }
  if (in.bad()) throw InputError("read error on " + source);
  if (!have_header) throw DataError(source + ": empty file (missing header)");
  return doc;
}

JsonlDocument read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_jsonl(in, path.string());
}

void write_jsonl(std::ostream& out, const json& header, const std::vector<json>& rows) {
  out << header.dump() << '\n';
  for (const auto& r : rows) out << r.dump() << '\n';
}

json to_json(const ResponseRecord& r) {
  json j;
  j["id"] = r.id;
  j["dataset"] = std::string(to_string(r.dataset));
  j["language"] = r.language;
  j["subject"] = r.subject;
  j["strategy"] = std::string(to_string(r.strategy));
  j["backbone"] = r.backbone;
  j["question"] = r.question;
  j["options"] = r.options;
  j["context"] = r.context ? json(*r.context) : json(nullptr);
  j["gold"] = r.gold;
  j["response_text"] = r.response_text;
  j["parsed_answer"] = r.parsed_answer ? json(*r.parsed_answer) : json(nullptr);
  j["is_correct"] = r.is_correct ? json(*r.is_correct) : json(nullptr);
  if (r.generation_failed) j["generation_failed"] = true;
  if (r.route_decision) j["route_decision"] = std::string(to_string(*r.route_decision));
  return j;
}

namespace {

class FieldReader {
 public:
  FieldReader(const json& j, std::size_t line, std::vector<Issue>& issues)
      : j_(j), line_(line), issues_(issues) {
    if (j_.contains("id") && j_["id"].is_string()) id_ = j_["id"].get<std::string>();
  }

  void fail(const std::string& field, const std::string& msg) {
    issues_.push_back({line_, id_, field, msg});
    ok_ = false;
  }

  std::string str(const char* field, bool required = true) {
    if (!j_.contains(field) || j_[field].is_null()) {
      if (required) fail(field, "missing");
      return {};
    }
    if (!j_[field].is_string()) {
      fail(field, "expected string");
      return {};
    }
    return j_[field].get<std::string>();
  }

  std::optional<std::string> opt_str(const char* field) {
    if (!j_.contains(field) || j_[field].is_null()) return std::nullopt;
    if (!j_[field].is_string()) {
      fail(field, "expected string or null");
      return std::nullopt;
    }
    return j_[field].get<std::string>();
  }

  std::optional<bool> opt_bool(const char* field) {
    if (!j_.contains(field) || j_[field].is_null()) return std::nullopt;
    if (!j_[field].is_boolean()) {
      fail(field, "expected boolean or null");
      return std::nullopt;
    }
    return j_[field].get<bool>();
  }

  std::vector<std::string> str_list(const char* field) {
    std::vector<std::string> out;
    if (!j_.contains(field) || j_[field].is_null()) return out;
    if (!j_[field].is_array()) {
      fail(field, "expected array of strings");
      return out;
    }
    for (const auto& v : j_[field]) {
      if (!v.is_string()) {
        fail(field, "expected array of strings");
        return {};
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  bool ok() const { return ok_; }

 private:
  const json& j_;
  std::size_t line_;
  std::vector<Issue>& issues_;
  std::string id_;
  bool ok_ = true;
};

}  // namespace

std::optional<ResponseRecord> record_from_json(const json& j, std::size_t line,
                                               std::vector<Issue>& issues) {
  if (!j.is_object()) {
    issues.push_back({line, "", "", "record is not a JSON object"});
    return std::nullopt;
  }
  FieldReader f(j, line, issues);
  ResponseRecord r;
  r.id = f.str("id");
  const std::string dataset = f.str("dataset");
  if (auto d = parse_dataset(dataset)) {
    r.dataset = *d;
  } else if (!dataset.empty()) {
    f.fail("dataset", "unknown dataset '" + dataset + "'");
  }
  r.language = f.str("language");
  r.subject = f.str("subject", false);
  const std::string strategy = f.str("strategy");
  if (auto s = parse_strategy(strategy)) {
    r.strategy = *s;
  } else if (!strategy.empty()) {
    f.fail("strategy", "unknown strategy '" + strategy + "'");
  }
  r.backbone = f.str("backbone");
  r.question = f.str("question");
  r.options = f.str_list("options");
  r.context = f.opt_str("context");
  r.gold = f.str("gold");
  r.response_text = f.str("response_text", false);
  r.parsed_answer = f.opt_str("parsed_answer");
  r.is_correct = f.opt_bool("is_correct");
  r.generation_failed = f.opt_bool("generation_failed").value_or(false);
  if (auto route = f.opt_str("route_decision")) {
    if (auto parsed = parse_route(*route)) {
      r.route_decision = parsed;
    } else {
      f.fail("route_decision", "unknown route '" + *route + "'");
    }
  }
  if (!f.ok()) return std::nullopt;
  return r;
}

json to_json(const InstancePair& p) {
  json j;
  j["id"] = p.id;
  j["dataset"] = std::string(to_string(p.dataset));
  j["language"] = p.language;
  j["subject"] = p.subject;
  j["backbone"] = p.backbone;
  j["question"] = p.question;
  j["options"] = p.options;
  j["context"] = p.context ? json(*p.context) : json(nullptr);
  j["gold"] = p.gold;
  j["native"] = to_json(p.native);
  j["translate"] = to_json(p.translate);
  j["label"] = p.label ? json(static_cast<int>(*p.label)) : json(nullptr);
  return j;
}

InstancePair pair_from_json(const json& j) {
  std::vector<Issue> issues;
  const auto native = j.contains("native") ? record_from_json(j["native"], 0, issues) : std::nullopt;
  const auto translate =
      j.contains("translate") ? record_from_json(j["translate"], 0, issues) : std::nullopt;
  if (!native || !translate) {
    std::string msg = "pair is missing a valid native/translate record";
    if (!issues.empty()) msg += ": " + issues.front().describe();
    throw DataError(msg);
  }
  InstancePair p;
  p.id = native->id;
  p.dataset = native->dataset;
  p.language = native->language;
  p.subject = native->subject;
  p.backbone = native->backbone;
  p.question = native->question;
  p.options = native->options;
  p.context = native->context;
  p.gold = native->gold;
  p.native = *native;
  p.translate = *translate;
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number_integer()) throw DataError("pair " + p.id + ": label must be 0, 1 or null");
    const int label = j["label"].get<int>();
    if (label != 0 && label != 1) throw DataError("pair " + p.id + ": label must be 0, 1 or null");
    p.label = static_cast<Route>(label);
  }
  return p;
}

LogReadResult read_log(std::istream& in, const std::string& source) {
  JsonlDocument doc = read_jsonl(in, source);
  LogReadResult result;
  result.issues = std::move(doc.issues);
  for (const auto& row : doc.rows) {
    if (auto r = record_from_json(row.value, row.line, result.issues)) {
      result.records.push_back(std::move(*r));
    }
  }
  std::stable_sort(result.issues.begin(), result.issues.end(),
                   [](const Issue& a, const Issue& b) { return a.line < b.line; });
  return result;
}

LogReadResult read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_log(in, path.string());
}

void write_log(std::ostream& out, const std::vector<ResponseRecord>& records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  write_jsonl(out, json{{"schema", kSchemaVersion}, {"kind", "responses"}}, rows);
}

std::vector<InstancePair> read_pairs(const std::filesystem::path& path) {
  const JsonlDocument doc = read_jsonl(path);
  if (!doc.issues.empty()) throw DataError(path.string() + ": " + doc.issues.front().describe());
  std::vector<InstancePair> pairs;
  pairs.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    try {
      pairs.push_back(pair_from_json(row.value));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
    }
  }
  return pairs;
}

void write_pairs(std::ostream& out, const std::vector<InstancePair>& pairs) {
  std::vector<json> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(to_json(p));
  write_jsonl(out, json{{"schema", kSchemaVersion}, {"kind", "pairs"}}, rows);
}

}  // namespace promptroute::core
