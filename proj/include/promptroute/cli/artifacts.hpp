#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace promptroute::cli {

// Collects a stage's outputs in temporary siblings and publishes them all at
// once. Uncommitted temporaries are removed on destruction, so a failing
// stage leaves no partial artifact behind.
class StageWriter {
 public:
  StageWriter(std::string stage, std::filesystem::path out_dir);
  ~StageWriter();
  StageWriter(const StageWriter&) = delete;
  StageWriter& operator=(const StageWriter&) = delete;

  // `path` is absolute or relative to the output directory.
  void write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn);
  void add_input(const std::filesystem::path& path);

  // Renames every output into place, then writes manifests/<stage>.json with
  // input and output checksums, the config snapshot and versions.
  void commit(const nlohmann::json& config, const nlohmann::json& extra = nlohmann::json::object());

  const std::filesystem::path& out_dir() const { return out_dir_; }
  std::filesystem::path manifest_path() const;

 private:
  struct Pending {
    std::filesystem::path tmp;
    std::filesystem::path final;
  };

  std::string display(const std::filesystem::path& p) const;

  std::string stage_;
  std::filesystem::path out_dir_;
  std::vector<Pending> pending_;
  std::vector<std::filesystem::path> inputs_;
  bool committed_ = false;
};

}  // namespace promptroute::cli
