#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptroute::core {

enum class ResourceLevel { high, mid, low };

std::string_view to_string(ResourceLevel level);
std::optional<ResourceLevel> parse_resource_level(std::string_view s);

inline constexpr ResourceLevel kAllResourceLevels[] = {ResourceLevel::high, ResourceLevel::mid,
                                                       ResourceLevel::low};

// The ten evaluated languages in column order: high, mid, low.
const std::vector<std::string>& evaluated_languages();

struct ResourceLookup {
  std::optional<ResourceLevel> level;
  // True when the language is outside the fixed mapping and overrides; the
  // caller should warn.
  bool unmapped = false;
};

// Fixed high/mid/low mapping plus configured extensions. Languages that are
// neither mapped nor covered by a default are excluded from resource-level
// analyses.
class ResourceMap {
 public:
  ResourceMap() = default;
  ResourceMap(std::map<std::string, ResourceLevel> overrides,
              std::optional<ResourceLevel> default_level);

  ResourceLookup lookup(std::string_view language) const;

 private:
  std::map<std::string, ResourceLevel, std::less<>> overrides_;
  std::optional<ResourceLevel> default_level_;
};

}  // namespace promptroute::core
