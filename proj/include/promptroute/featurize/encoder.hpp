#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "promptroute/core/types.hpp"

namespace promptroute::featurize {

inline constexpr std::string_view kUnknown = "<unk>";

enum class Tokenizer { whitespace, icu };
// rank: rare iff rank > rare_rank_threshold (or unseen).
// median: rare iff train frequency < median frequency of the table (or unseen).
enum class RareMode { rank, median };

struct EncoderOptions {
  std::size_t rare_rank_threshold = 10000;
  RareMode rare_mode = RareMode::rank;
  Tokenizer tokenizer = Tokenizer::whitespace;
};

// Categorical vocabularies and the word-frequency table, frozen at fit time.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  // Throws core::DataError on empty input.
  static FeatureEncoder fit(std::span<const core::InstancePair> train, const EncoderOptions& options = {});

  const std::vector<std::string>& languages() const { return languages_; }
  const std::vector<std::string>& datasets() const { return datasets_; }
  const std::vector<std::string>& subjects() const { return subjects_; }
  const EncoderOptions& options() const { return options_; }

  std::vector<std::string> tokenize(std::string_view text) const;
  bool is_rare(const std::string& token) const;
  std::size_t vocabulary_size() const { return frequency_.size(); }
  // Content hash of the serialized encoder (16 hex digits).
  const std::string& version() const { return version_; }

  nlohmann::json to_json() const;
  static FeatureEncoder from_json(const nlohmann::json& j);  // throws core::DataError
  void save(const std::filesystem::path& path) const;
  static FeatureEncoder load(const std::filesystem::path& path);

  bool operator==(const FeatureEncoder& o) const { return to_json() == o.to_json(); }

 private:
  void finalize();

  EncoderOptions options_;
  std::vector<std::string> languages_;  // sorted, without the unknown bucket
  std::vector<std::string> datasets_;
  std::vector<std::string> subjects_;
  // (token, count), sorted by count desc then token asc; rank = index + 1.
  std::vector<std::pair<std::string, std::uint64_t>> frequency_;
  std::unordered_map<std::string, std::size_t> rank_;  // token -> 1-based rank
  double median_count_ = 0.0;
  std::string version_;
};

std::string_view to_string(Tokenizer t);
std::string_view to_string(RareMode m);

}  // namespace promptroute::featurize
