#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "promptroute/core/format.hpp"
#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/parallel.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/quality/quality.hpp"

namespace promptroute::quality {

namespace {

enum class Label { question, options, context, reasoning, answer, none };

std::string_view strip_decoration(std::string_view s) {
  while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '-' || s.front() == '_' ||
                        s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

// Classifies a line; `rest` receives the text after a section label.
Label classify(std::string_view line, std::string& rest) {
  const std::string_view s = strip_decoration(core::trim_ascii(line));
  struct Known {
    std::string_view prefix;
    Label label;
  };
  static constexpr Known known[] = {{"translated question", Label::question},
                                    {"translated options", Label::options},
                                    {"translated context", Label::context},
                                    {"reasoning", Label::reasoning}};
  for (const auto& k : known) {
    if (!starts_with_ci(s, k.prefix)) continue;
    std::string_view after = s.substr(k.prefix.size());
    after = strip_decoration(after);
    if (after.empty() || after.front() != ':') continue;
    after.remove_prefix(1);
    rest = std::string(core::trim_ascii(strip_decoration(after)));
    return k.label;
  }
  if (starts_with_ci(s, "answer") && (s.size() == 6 || !std::isalpha(static_cast<unsigned char>(s[6])))) {
    return Label::answer;
  }
  return Label::none;
}

}  // namespace

std::optional<TranslationSections> extract_translation(const core::ResponseRecord& record) {
  TranslationSections out;
  std::optional<std::string>* current = nullptr;
  std::set<Label> seen;
  for (const auto& line : core::split_lines(record.response_text)) {
    std::string rest;
    const Label label = classify(line, rest);
    if (label == Label::none) {
      if (current != nullptr) {
        if (!(*current)->empty()) **current += '\n';
        **current += std::string(core::trim_ascii(line));
      }
      continue;
    }
    current = nullptr;
    // the first occurrence of each label wins
    if (!seen.insert(label).second) continue;
    if (label == Label::question) current = &out.question;
    if (label == Label::options) current = &out.options;
    if (label == Label::context) current = &out.context;
    if (current != nullptr) *current = rest;
  }
  for (auto* section : {&out.question, &out.options, &out.context}) {
    if (*section) {
      const std::string trimmed(core::trim_ascii(**section));
      if (trimmed.empty()) {
        section->reset();
      } else {
        **section = trimmed;
      }
    }
  }
  if (!out.question) return std::nullopt;
  if (core::task_kind(record) == core::TaskKind::multiple_choice && !out.options) return std::nullopt;
  return out;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::chrf:
      return "chrf";
    case Metric::bleurt:
      return "bleurt";
    case Metric::meteor:
      return "meteor";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view s) {
  const std::string lower = core::to_lower_ascii(s);
  if (lower == "chrf") return Metric::chrf;
  if (lower == "bleurt") return Metric::bleurt;
  if (lower == "meteor") return Metric::meteor;
  return std::nullopt;
}

std::map<std::string, Reference> read_references(const std::filesystem::path& path) {
  const auto doc = core::read_jsonl(path);
  if (doc.header.value("kind", "") != "references") {
    throw core::DataError(path.string() + ": header kind must be \"references\"");
  }
  if (!doc.issues.empty()) throw core::DataError(path.string() + ": " + doc.issues.front().describe());
  std::map<std::string, Reference> refs;
  for (const auto& row : doc.rows) {
    const auto where = path.string() + ": line " + std::to_string(row.line);
    try {
      Reference r;
      r.id = row.value.at("id").get<std::string>();
      r.question = row.value.at("question").get<std::string>();
      if (row.value.contains("options") && !row.value["options"].is_null()) {
        r.options = row.value["options"].get<std::vector<std::string>>();
      }
      if (r.id.empty()) throw core::DataError(where + ": empty id");
      const std::string id = r.id;
      if (!refs.emplace(id, std::move(r)).second) throw core::DataError(where + ": duplicate id '" + id + "'");
    } catch (const nlohmann::json::exception& e) {
      throw core::DataError(where + ": " + e.what());
    }
  }
  return refs;
}

void ScoreTable::set(const std::string& key, Metric metric, double value, ScoreSource source) {
  if (!std::isfinite(value)) throw core::DataError("non-finite " + std::string(to_string(metric)) + " for " + key);
  if (metric == Metric::chrf && source == ScoreSource::ingested) {
    throw core::DataError("chrf scores are computed, not ingested (" + key + ")");
  }
  auto& m = values_[metric];
  if (!m.emplace(key, value).second) {
    throw core::DataError("duplicate " + std::string(to_string(metric)) + " score for " + key);
  }
  sources_[metric] = source;
}

std::optional<double> ScoreTable::get(const std::string& key, Metric metric) const {
  const auto it = values_.find(metric);
  if (it == values_.end()) return std::nullopt;
  const auto v = it->second.find(key);
  if (v == it->second.end()) return std::nullopt;
  return v->second;
}

std::size_t ScoreTable::size(Metric metric) const {
  const auto it = values_.find(metric);
  return it == values_.end() ? 0 : it->second.size();
}

const std::map<std::string, double>& ScoreTable::values(Metric metric) const {
  static const std::map<std::string, double> empty;
  const auto it = values_.find(metric);
  return it == values_.end() ? empty : it->second;
}

ChrfRun score_chrf(std::span<const core::InstancePair> pairs, const std::map<std::string, Reference>& refs,
                   ScoreTable& table, unsigned threads) {
  enum class Outcome { scored, excluded, no_reference };
  std::vector<Outcome> outcome(pairs.size(), Outcome::excluded);
  std::vector<double> value(pairs.size(), 0.0);
  core::parallel_for(
      pairs.size(),
      [&](std::size_t i) {
        const auto& p = pairs[i];
        const auto ref = refs.find(p.id);
        if (ref == refs.end()) {
          outcome[i] = Outcome::no_reference;
          return;
        }
        const auto sections = extract_translation(p.translate);
        if (!sections) return;
        std::string hyp = *sections->question;
        std::string gold = ref->second.question;
        if (sections->options && !ref->second.options.empty()) {
          hyp += " " + *sections->options;
          gold += " " + core::format_options(ref->second.options);
        }
        value[i] = chrf(hyp, gold);
        outcome[i] = Outcome::scored;
      },
      threads);
  ChrfRun run;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    switch (outcome[i]) {
      case Outcome::scored:
        table.set(pairs[i].key(), Metric::chrf, value[i], ScoreSource::computed);
        ++run.scored;
        break;
      case Outcome::excluded:
        ++run.excluded;
        run.excluded_ids.push_back(pairs[i].key());
        break;
      case Outcome::no_reference:
        ++run.no_reference;
        break;
    }
  }
  return run;
}

std::size_t ingest_scores(std::istream& in, const std::string& source, std::span<const core::InstancePair> pairs,
                          ScoreTable& table) {
  if (!in) throw core::InputError("cannot read " + source);
  std::map<std::string, std::vector<std::string>> keys_by_id;
  for (const auto& p : pairs) keys_by_id[p.id].push_back(p.key());

  std::string line;
  if (!std::getline(in, line)) throw core::DataError(source + ": empty score file");
  const auto header = core::split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[core::to_lower_ascii(core::trim_ascii(header[i]))] = i;
  for (const char* need : {"id", "metric", "value"}) {
    if (!col.count(need)) throw core::DataError(source + ": missing column '" + need + "'");
  }
  const bool has_backbone = col.count("backbone") > 0;
  std::size_t lineno = 1, stored = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (core::trim_ascii(line).empty()) continue;
    const auto where = source + ": line " + std::to_string(lineno);
    const auto f = core::split_csv_line(line);
    if (f.size() != header.size()) throw core::DataError(where + ": expected " + std::to_string(header.size()) + " fields");
    const auto metric = parse_metric(core::trim_ascii(f[col["metric"]]));
    if (!metric) throw core::DataError(where + ": unknown metric '" + f[col["metric"]] + "'");
    if (*metric == Metric::chrf) throw core::DataError(where + ": chrf is computed natively, not ingested");
    const auto value = core::parse_number(core::trim_ascii(f[col["value"]]));
    if (!value) throw core::DataError(where + ": bad value '" + f[col["value"]] + "'");
    const std::string id(core::trim_ascii(f[col["id"]]));
    if (has_backbone && !core::trim_ascii(f[col["backbone"]]).empty()) {
      table.set(std::string(core::trim_ascii(f[col["backbone"]])) + "/" + id, *metric, *value, ScoreSource::ingested);
      ++stored;
    } else {
      // scores for ids outside the evaluated pairs are ignored
      const auto it = keys_by_id.find(id);
      if (it == keys_by_id.end()) continue;
      for (const auto& key : it->second) {
        table.set(key, *metric, *value, ScoreSource::ingested);
        ++stored;
      }
    }
  }
  return stored;
}

std::size_t ingest_scores(const std::filesystem::path& path, std::span<const core::InstancePair> pairs,
                          ScoreTable& table) {
  std::ifstream in(path);
  if (!in) throw core::InputError("cannot open " + path.string());
  return ingest_scores(in, path.string(), pairs, table);
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  out << "key,metric,value\n";
  for (const auto m : {Metric::chrf, Metric::bleurt, Metric::meteor}) {
    for (const auto& [key, v] : table.values(m)) {
      out << core::csv_field(key) << ',' << to_string(m) << ',' << core::shortest(v) << '\n';
    }
  }
}

}  // namespace promptroute::quality
