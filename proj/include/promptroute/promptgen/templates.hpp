#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/types.hpp"

namespace promptroute::promptgen {

enum class InstructionMode { native, english };

// NATIVE and SCOT-NATIVE instruct in the question's language.
InstructionMode instruction_mode(core::Strategy s);

// Body placeholders: {question} {options} {context} {language}
// {language_name} {letters}. {language} and {language_name} both bind to the
// English name of the question language; {letters} to the option letters
// ("ABCD" for four options).
struct PromptTemplate {
  core::Strategy strategy = core::Strategy::native;
  core::TaskKind kind = core::TaskKind::multiple_choice;
  InstructionMode mode = InstructionMode::english;
  std::string instruction_language = "en";
  std::string body;
};

// One benchmark item to prompt for.
struct Instance {
  std::string id;
  core::Dataset dataset = core::Dataset::custom;
  std::string language;
  std::string subject;
  std::string question;
  std::vector<std::string> options;
  std::optional<std::string> context;
  std::string gold;

  core::TaskKind kind() const { return core::task_kind(dataset, options); }
};

// JSONL with a header of kind "instances". Throws InputError/DataError.
std::vector<Instance> read_instances(const std::filesystem::path& path);

class MissingInstruction : public core::ConfigError {
 public:
  explicit MissingInstruction(std::vector<std::string> languages);
  const std::vector<std::string>& languages() const { return languages_; }

 private:
  std::vector<std::string> languages_;
};

class RenderError : public core::DataError {
 public:
  using core::DataError::DataError;
};

// Template assets: templates/<strategy>.<mc|qa>.txt hold the English bodies,
// instructions/<lang>/<strategy>.<mc|qa>.txt the native-language ones, and
// languages.toml the display names.
class TemplateSet {
 public:
  // Throws ConfigError on a missing file or an unknown placeholder.
  static TemplateSet load(const std::filesystem::path& asset_dir);
  static std::filesystem::path default_dir();

  // Throws MissingInstruction for a native-mode strategy without a
  // translated body for `language`. English falls back to the English body.
  const PromptTemplate& get(core::Strategy s, core::TaskKind kind, std::string_view language) const;
  // Throws MissingInstruction listing every language that lacks a body.
  void require(std::span<const core::Strategy> strategies, std::span<const Instance> instances) const;

  // Throws ConfigError for a language without a display name.
  const std::string& language_name(std::string_view code) const;
  std::vector<std::string> instruction_languages() const;

 private:
  using Key = std::tuple<core::Strategy, core::TaskKind, std::string>;
  std::map<Key, PromptTemplate> templates_;
  std::map<std::string, std::string, std::less<>> names_;
};

// Option letters for `count` options: 4 -> "ABCD".
std::string option_letters(std::size_t count);

// Single-pass substitution; substituted text is never rescanned. Throws
// RenderError when the body needs a field the instance lacks.
std::string render(const PromptTemplate& t, const Instance& instance, const std::string& language_name);
std::string render(const TemplateSet& set, core::Strategy s, const Instance& instance);

// Last non-empty line "ROUTE: NATIVE" / "ROUTE: TRANSLATE", any case, with
// optional markdown emphasis and surrounding whitespace.
std::optional<core::Route> parse_route_decision(std::string_view response_text);

}  // namespace promptroute::promptgen
