#include "promptroute/core/types.hpp"

#include <array>
#include <utility>

namespace promptroute::core {

namespace {

constexpr std::array<std::pair<Dataset, std::string_view>, 6> kDatasetNames{{
    {Dataset::global_mmlu, "global_mmlu"},
    {Dataset::mmlu_prox, "mmlu_prox"},
    {Dataset::xquad, "xquad"},
    {Dataset::mcsqa, "mcsqa"},
    {Dataset::xcopa, "xcopa"},
    {Dataset::custom, "custom"},
}};

constexpr std::array<std::pair<Strategy, std::string_view>, 6> kStrategyNames{{
    {Strategy::native, "native"},
    {Strategy::translate, "translate"},
    {Strategy::sel_trans, "sel_trans"},
    {Strategy::scot_native, "scot_native"},
    {Strategy::scot_trans, "scot_trans"},
    {Strategy::prompt_routing, "prompt_routing"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table,
                          std::string_view s) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Dataset d) { return name_of(kDatasetNames, d); }
std::string_view to_string(Strategy s) { return name_of(kStrategyNames, s); }

std::string_view to_string(TaskKind k) {
  return k == TaskKind::multiple_choice ? "multiple_choice" : "qa";
}

std::string_view to_string(Route r) { return r == Route::native ? "native" : "translate"; }

std::optional<Dataset> parse_dataset(std::string_view s) { return value_of(kDatasetNames, s); }
std::optional<Strategy> parse_strategy(std::string_view s) { return value_of(kStrategyNames, s); }

std::optional<Route> parse_route(std::string_view s) {
  if (s == "native" || s == "0") return Route::native;
  if (s == "translate" || s == "1") return Route::translate;
  return std::nullopt;
}

TaskKind task_kind(Dataset dataset, const std::vector<std::string>& options) {
  if (dataset == Dataset::xquad) return TaskKind::qa;
  if (dataset == Dataset::custom && options.empty()) return TaskKind::qa;
  return TaskKind::multiple_choice;
}

char option_letter(std::size_t index) { return static_cast<char>('A' + index); }

std::optional<std::size_t> option_index(char letter) {
  if (letter >= 'A' && letter <= 'Z') return static_cast<std::size_t>(letter - 'A');
  if (letter >= 'a' && letter <= 'z') return static_cast<std::size_t>(letter - 'a');
  return std::nullopt;
}

std::string format_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) out += '\n';
    out += option_letter(i);
    out += ". ";
    out += options[i];
  }
  return out;
}

}  // namespace promptroute::core
