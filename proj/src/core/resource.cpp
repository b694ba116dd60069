#include "promptroute/core/resource.hpp"

#include <array>
#include <utility>

namespace promptroute::core {

namespace {

constexpr std::array<std::pair<std::string_view, ResourceLevel>, 10> kFixed{{
    {"zh", ResourceLevel::high},
    {"es", ResourceLevel::high},
    {"de", ResourceLevel::high},
    {"hi", ResourceLevel::high},
    {"bn", ResourceLevel::mid},
    {"id", ResourceLevel::mid},
    {"ko", ResourceLevel::mid},
    {"si", ResourceLevel::low},
    {"sw", ResourceLevel::low},
    {"yo", ResourceLevel::low},
}};

}  // namespace

std::string_view to_string(ResourceLevel level) {
  switch (level) {
    case ResourceLevel::high:
      return "high";
    case ResourceLevel::mid:
      return "mid";
    case ResourceLevel::low:
      return "low";
  }
  return "?";
}

std::optional<ResourceLevel> parse_resource_level(std::string_view s) {
  if (s == "high") return ResourceLevel::high;
  if (s == "mid") return ResourceLevel::mid;
  if (s == "low") return ResourceLevel::low;
  return std::nullopt;
}

const std::vector<std::string>& evaluated_languages() {
  static const std::vector<std::string> langs = [] {
    std::vector<std::string> out;
    for (const auto& [code, level] : kFixed) out.emplace_back(code);
    return out;
  }();
  return langs;
}

ResourceMap::ResourceMap(std::map<std::string, ResourceLevel> overrides,
                         std::optional<ResourceLevel> default_level)
    : overrides_(overrides.begin(), overrides.end()), default_level_(default_level) {}

ResourceLookup ResourceMap::lookup(std::string_view language) const {
  for (const auto& [code, level] : kFixed) {
    if (code == language) return {level, false};
  }
  if (auto it = overrides_.find(language); it != overrides_.end()) return {it->second, false};
  return {default_level_, true};
}

}  // namespace promptroute::core
