#include "promptroute/core/validate.hpp"

#include <map>
#include <tuple>

namespace promptroute::core {

std::vector<Issue> validate_log(std::span<const ResponseRecord> records) {
  std::vector<Issue> issues;
  std::map<std::tuple<std::string, Strategy, std::string>, std::size_t> seen;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const ResponseRecord& r = records[i];
    const auto add = [&](std::string field, std::string msg) {
      issues.push_back({0, r.id, std::move(field), std::move(msg)});
    };

    if (r.id.empty()) add("id", "empty (record #" + std::to_string(i + 1) + ")");
    if (r.language.empty()) add("language", "empty");
    if (r.backbone.empty()) add("backbone", "empty");
    if (r.gold.empty()) add("gold", "empty");

    const auto key = std::make_tuple(r.id, r.strategy, r.backbone);
    if (auto [it, inserted] = seen.emplace(key, i); !inserted) {
      add("id", "duplicate (id, strategy, backbone) = (" + r.id + ", " +
                    std::string(to_string(r.strategy)) + ", " + r.backbone + ")");
    }

    if (task_kind(r) == TaskKind::multiple_choice) {
      if (r.options.size() < 2) {
        add("options", "options<2");
      } else if (r.options.size() > 26) {
        add("options", "more than 26 options");
      }
      const auto gold_index = r.gold.size() == 1 ? option_index(r.gold[0]) : std::nullopt;
      if (!r.gold.empty() && (!gold_index || *gold_index >= r.options.size())) {
        add("gold", "'" + r.gold + "' is not an option letter");
      }
      if (r.parsed_answer) {
        const auto idx =
            r.parsed_answer->size() == 1 ? option_index((*r.parsed_answer)[0]) : std::nullopt;
        if (!idx || *idx >= r.options.size()) {
          add("parsed_answer", "'" + *r.parsed_answer + "' is not an option letter");
        }
      }
    } else if (!r.context || r.context->empty()) {
      add("context", "QA record without context");
    }

    if (r.parsed_answer && !r.is_correct) add("is_correct", "parsed_answer set but is_correct unset");
  }
  return issues;
}

}  // namespace promptroute::core
