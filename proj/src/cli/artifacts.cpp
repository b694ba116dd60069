#include <algorithm>
#include <fstream>

#include "promptroute/cli/artifacts.hpp"
#include "promptroute/cli/config.hpp"
#include "promptroute/core/errors.hpp"
#include "promptroute/core/hash.hpp"
#include "promptroute/core/jsonl.hpp"

namespace promptroute::cli {

namespace fs = std::filesystem;

StageWriter::StageWriter(std::string stage, fs::path out_dir) : stage_(std::move(stage)), out_dir_(std::move(out_dir)) {}

StageWriter::~StageWriter() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& p : pending_) fs::remove(p.tmp, ec);
}

fs::path StageWriter::manifest_path() const { return out_dir_ / "manifests" / (stage_ + ".json"); }

std::string StageWriter::display(const fs::path& p) const {
  return p.lexically_proximate(out_dir_).generic_string();
}

void StageWriter::write(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  const fs::path final = path.is_absolute() ? path : out_dir_ / path;
  if (!final.parent_path().empty()) fs::create_directories(final.parent_path());
  fs::path tmp = final;
  tmp += ".tmp";
  pending_.push_back({tmp, final});
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw core::InputError("cannot write " + tmp.string());
  fn(out);
  out.flush();
  if (!out) throw core::InputError("write failed for " + final.string());
}

void StageWriter::add_input(const fs::path& path) {
  if (std::find(inputs_.begin(), inputs_.end(), path) == inputs_.end()) inputs_.push_back(path);
}

void StageWriter::commit(const nlohmann::json& config, const nlohmann::json& extra) {
  nlohmann::json manifest;
  manifest["stage"] = stage_;
  manifest["versions"] = {{"promptroute", kVersion}, {"schema", core::kSchemaVersion}};
  manifest["config"] = config;
  manifest["seed"] = config.value("seed", 0);
  auto inputs = nlohmann::json::array();
  for (const auto& p : inputs_) inputs.push_back({{"path", display(p)}, {"sha256", core::sha256_file(p)}});
  manifest["inputs"] = inputs;
  auto outputs = nlohmann::json::array();
  for (const auto& p : pending_) outputs.push_back({{"path", display(p.final)}, {"sha256", core::sha256_file(p.tmp)}});
  manifest["outputs"] = outputs;
  for (const auto& [k, v] : extra.items()) manifest[k] = v;

  const auto mpath = manifest_path();
  fs::create_directories(mpath.parent_path());
  fs::path mtmp = mpath;
  mtmp += ".tmp";
  {
    std::ofstream out(mtmp, std::ios::binary | std::ios::trunc);
    if (!out) throw core::InputError("cannot write " + mtmp.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw core::InputError("write failed for " + mpath.string());
  }
  pending_.push_back({mtmp, mpath});
  for (const auto& p : pending_) fs::rename(p.tmp, p.final);
  committed_ = true;
}

}  // namespace promptroute::cli
