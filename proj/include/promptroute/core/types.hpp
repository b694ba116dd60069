#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptroute::core {

enum class Dataset { global_mmlu, mmlu_prox, xquad, mcsqa, xcopa, custom };

enum class Strategy { native, translate, sel_trans, scot_native, scot_trans, prompt_routing };

enum class TaskKind { multiple_choice, qa };

// Routing target. The numeric value is the classifier label.
enum class Route : int { native = 0, translate = 1 };

std::string_view to_string(Dataset d);
std::string_view to_string(Strategy s);
std::string_view to_string(TaskKind k);
std::string_view to_string(Route r);

std::optional<Dataset> parse_dataset(std::string_view s);
std::optional<Strategy> parse_strategy(std::string_view s);
std::optional<Route> parse_route(std::string_view s);

inline constexpr Dataset kAllDatasets[] = {Dataset::global_mmlu, Dataset::mmlu_prox, Dataset::xquad,
                                           Dataset::mcsqa, Dataset::xcopa, Dataset::custom};
inline constexpr Strategy kAllStrategies[] = {Strategy::native,      Strategy::translate,
                                              Strategy::sel_trans,   Strategy::scot_native,
                                              Strategy::scot_trans,  Strategy::prompt_routing};

// One model response for one (instance, strategy, backbone).
struct ResponseRecord {
  std::string id;
  Dataset dataset = Dataset::custom;
  std::string language;
  std::string subject;
  Strategy strategy = Strategy::native;
  std::string backbone;
  std::string question;
  std::vector<std::string> options;
  std::optional<std::string> context;
  std::string gold;
  std::string response_text;
  std::optional<std::string> parsed_answer;
  std::optional<bool> is_correct;

  // Set by the generator when every retry failed.
  bool generation_failed = false;
  // PROMPT-ROUTING only: the decision taken before the answering call.
  std::optional<Route> route_decision;

  bool operator==(const ResponseRecord&) const = default;
};

// xquad is extractive QA; custom records are QA iff they carry no options.
TaskKind task_kind(Dataset dataset, const std::vector<std::string>& options);
inline TaskKind task_kind(const ResponseRecord& r) { return task_kind(r.dataset, r.options); }

// Joined NATIVE/TRANSLATE records for one question; the unit of routing.
struct InstancePair {
  std::string id;
  Dataset dataset = Dataset::custom;
  std::string language;
  std::string subject;
  std::string backbone;
  std::string question;
  std::vector<std::string> options;
  std::optional<std::string> context;
  std::string gold;
  ResponseRecord native;
  ResponseRecord translate;
  std::optional<Route> label;

  std::string key() const { return backbone + "/" + id; }
  bool operator==(const InstancePair&) const = default;
};

// Option letter for a zero-based option index: 0 -> 'A'.
char option_letter(std::size_t index);
// Zero-based index of an option letter (case-insensitive), if it is a letter.
std::optional<std::size_t> option_index(char letter);
// "A. first\nB. second ..." as the prompts present options.
std::string format_options(const std::vector<std::string>& options);

}  // namespace promptroute::core
