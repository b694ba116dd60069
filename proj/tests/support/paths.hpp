#pragma once

#include <filesystem>
#include <string>

namespace promptroute::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PROMPTROUTE_FIXTURES_DIR) / name;
}

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(PROMPTROUTE_GOLDEN_DIR) / name;
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("promptroute_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace promptroute::testing
