#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/promptgen/templates.hpp"

#ifndef PROMPTROUTE_ASSET_DIR
#define PROMPTROUTE_ASSET_DIR "assets"
#endif

namespace promptroute::promptgen {

namespace {

constexpr std::string_view kPlaceholders[] = {"question", "options", "context", "language", "language_name",
                                              "letters"};

std::string_view kind_suffix(core::TaskKind k) { return k == core::TaskKind::multiple_choice ? "mc" : "qa"; }

std::string read_body(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::ConfigError("missing template asset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return body;
}

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Yields each {name} token in `body` as (offset, length, name).
template <typename Fn>
void scan_placeholders(std::string_view body, Fn&& fn) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < body.size() && is_name_char(body[j])) ++j;
    if (j == i + 1 || j >= body.size() || body[j] != '}') continue;
    fn(i, j + 1 - i, body.substr(i + 1, j - i - 1));
    i = j;
  }
}

void check_placeholders(const std::string& body, const std::filesystem::path& path) {
  scan_placeholders(body, [&](std::size_t, std::size_t, std::string_view name) {
    if (std::find(std::begin(kPlaceholders), std::end(kPlaceholders), name) == std::end(kPlaceholders)) {
      throw core::ConfigError(path.string() + ": unknown placeholder {" + std::string(name) + "}");
    }
  });
}

}  // namespace

InstructionMode instruction_mode(core::Strategy s) {
  return s == core::Strategy::native || s == core::Strategy::scot_native ? InstructionMode::native
                                                                          : InstructionMode::english;
}

MissingInstruction::MissingInstruction(std::vector<std::string> languages)
    : core::ConfigError([&] {
        std::string msg = "no translated instruction for language(s):";
        for (const auto& l : languages) msg += " " + l;
        return msg;
      }()),
      languages_(std::move(languages)) {}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
  const auto doc = core::read_jsonl(path);
  if (doc.header.value("kind", "") != "instances") {
    throw core::DataError(path.string() + ": header kind must be \"instances\"");
  }
  if (!doc.issues.empty()) throw core::DataError(path.string() + ": " + doc.issues.front().describe());
  std::vector<Instance> out;
  std::set<std::string> seen;
  for (const auto& row : doc.rows) {
    const auto where = path.string() + ": line " + std::to_string(row.line);
    try {
      const auto& j = row.value;
      Instance inst;
      inst.id = j.at("id").get<std::string>();
      const auto ds = core::parse_dataset(j.at("dataset").get<std::string>());
      if (!ds) throw core::DataError(where + ": unknown dataset '" + j["dataset"].get<std::string>() + "'");
      inst.dataset = *ds;
      inst.language = j.at("language").get<std::string>();
      inst.subject = j.value("subject", "");
      inst.question = j.at("question").get<std::string>();
      if (j.contains("options") && !j["options"].is_null()) {
        inst.options = j["options"].get<std::vector<std::string>>();
      }
      if (j.contains("context") && !j["context"].is_null()) inst.context = j["context"].get<std::string>();
      inst.gold = j.at("gold").get<std::string>();
      if (inst.id.empty()) throw core::DataError(where + ": empty id");
      if (inst.language.empty()) throw core::DataError(where + ": empty language");
      if (inst.kind() == core::TaskKind::multiple_choice && inst.options.empty()) {
        throw core::DataError(where + ": multiple-choice instance without options");
      }
      if (inst.kind() == core::TaskKind::qa && !inst.context) {
        throw core::DataError(where + ": qa instance without context");
      }
      if (!seen.insert(inst.id).second) throw core::DataError(where + ": duplicate id '" + inst.id + "'");
      out.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw core::DataError(where + ": " + e.what());
    }
  }
  return out;
}

std::filesystem::path TemplateSet::default_dir() {
  if (const char* env = std::getenv("PROMPTROUTE_ASSETS"); env && *env) return env;
  return PROMPTROUTE_ASSET_DIR;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  TemplateSet set;
  for (const auto s : core::kAllStrategies) {
    for (const auto k : {core::TaskKind::multiple_choice, core::TaskKind::qa}) {
      const auto file = std::string(core::to_string(s)) + "." + std::string(kind_suffix(k)) + ".txt";
      const auto path = dir / "templates" / file;
      PromptTemplate t{s, k, InstructionMode::english, "en", read_body(path)};
      check_placeholders(t.body, path);
      set.templates_[{s, k, "en"}] = std::move(t);
    }
  }
  std::error_code ec;
  const auto instr = dir / "instructions";
  if (std::filesystem::is_directory(instr, ec)) {
    std::vector<std::filesystem::path> langs;
    for (const auto& e : std::filesystem::directory_iterator(instr)) {
      if (e.is_directory()) langs.push_back(e.path());
    }
    std::sort(langs.begin(), langs.end());
    for (const auto& lang_dir : langs) {
      const auto lang = lang_dir.filename().string();
      for (const auto s : core::kAllStrategies) {
        if (instruction_mode(s) != InstructionMode::native) continue;
        for (const auto k : {core::TaskKind::multiple_choice, core::TaskKind::qa}) {
          const auto path = lang_dir / (std::string(core::to_string(s)) + "." + std::string(kind_suffix(k)) + ".txt");
          if (!std::filesystem::exists(path)) continue;
          PromptTemplate t{s, k, InstructionMode::native, lang, read_body(path)};
          check_placeholders(t.body, path);
          set.templates_[{s, k, lang}] = std::move(t);
        }
      }
    }
  }
  const auto names_path = dir / "languages.toml";
  try {
    const auto tbl = toml::parse_file(names_path.string());
    if (const auto* names = tbl["names"].as_table()) {
      for (const auto& [code, value] : *names) {
        if (const auto v = value.value<std::string>()) set.names_[std::string(code.str())] = *v;
      }
    }
  } catch (const toml::parse_error& e) {
    throw core::ConfigError(names_path.string() + ": " + std::string(e.description()));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(core::Strategy s, core::TaskKind kind, std::string_view language) const {
  if (instruction_mode(s) == InstructionMode::native && language != "en") {
    const auto it = templates_.find({s, kind, std::string(language)});
    if (it == templates_.end()) throw MissingInstruction({std::string(language)});
    return it->second;
  }
  return templates_.at({s, kind, "en"});
}

void TemplateSet::require(std::span<const core::Strategy> strategies, std::span<const Instance> instances) const {
  std::set<std::string> missing;
  for (const auto s : strategies) {
    for (const auto& inst : instances) {
      if (instruction_mode(s) != InstructionMode::native || inst.language == "en") continue;
      if (!templates_.count({s, inst.kind(), inst.language})) missing.insert(inst.language);
    }
  }
  if (!missing.empty()) throw MissingInstruction({missing.begin(), missing.end()});
}

const std::string& TemplateSet::language_name(std::string_view code) const {
  const auto it = names_.find(code);
  if (it == names_.end()) throw core::ConfigError("no display name for language '" + std::string(code) + "'");
  return it->second;
}

std::vector<std::string> TemplateSet::instruction_languages() const {
  std::set<std::string> langs;
  for (const auto& [key, t] : templates_) langs.insert(std::get<2>(key));
  return {langs.begin(), langs.end()};
}

std::string option_letters(std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) out += core::option_letter(i);
  return out;
}

std::string render(const PromptTemplate& t, const Instance& instance, const std::string& language_name) {
  std::string out;
  out.reserve(t.body.size() + instance.question.size() + 256);
  std::size_t pos = 0;
  scan_placeholders(t.body, [&](std::size_t at, std::size_t len, std::string_view name) {
    out.append(t.body, pos, at - pos);
    pos = at + len;
    if (name == "question") {
      out += instance.question;
    } else if (name == "options") {
      if (instance.options.empty()) throw RenderError(instance.id + ": template needs options");
      out += core::format_options(instance.options);
    } else if (name == "context") {
      if (!instance.context) throw RenderError(instance.id + ": template needs a context");
      out += *instance.context;
    } else if (name == "language" || name == "language_name") {
      out += language_name;
    } else if (name == "letters") {
      if (instance.options.empty()) throw RenderError(instance.id + ": template needs options");
      out += option_letters(instance.options.size());
    } else {
      throw RenderError("unbound placeholder {" + std::string(name) + "}");
    }
  });
  out.append(t.body, pos);
  return out;
}

std::string render(const TemplateSet& set, core::Strategy s, const Instance& instance) {
  return render(set.get(s, instance.kind(), instance.language), instance, set.language_name(instance.language));
}

std::optional<core::Route> parse_route_decision(std::string_view response_text) {
  const auto lines = core::split_lines(response_text);
  auto it = std::find_if(lines.rbegin(), lines.rend(),
                         [](const std::string& l) { return !core::trim_ascii(l).empty(); });
  if (it == lines.rend()) return std::nullopt;
  std::string_view s = core::trim_ascii(*it);
  auto strip = [&] {
    while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == '`')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == '`' || s.back() == '.')) {
      s.remove_suffix(1);
    }
    s = core::trim_ascii(s);
  };
  strip();
  const std::string lower = core::to_lower_ascii(s);
  std::string_view rest = lower;
  if (!rest.starts_with("route")) return std::nullopt;
  rest.remove_prefix(5);
  rest = core::trim_ascii(rest);
  if (rest.empty() || rest.front() != ':') return std::nullopt;
  rest.remove_prefix(1);
  rest = core::trim_ascii(rest);
  while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
  while (!rest.empty() && (rest.back() == '*' || rest.back() == '_')) rest.remove_suffix(1);
  rest = core::trim_ascii(rest);
  if (rest == "native") return core::Route::native;
  if (rest == "translate") return core::Route::translate;
  return std::nullopt;
}

}  // namespace promptroute::promptgen
