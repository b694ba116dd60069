#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "promptroute/core/types.hpp"

namespace promptroute::ingest {

// Multiple-choice: the last line reading "Answer <L>" / "Answer [L]" (any
// case, optional colon/brackets/trailing punctuation) whose letter indexes an
// existing option. QA: the remainder of the last "Answer:" line, normalized.
std::optional<std::string> parse_answer(const core::ResponseRecord& record);

// Leading articles stripped before QA exact match. "a", "an", "the" always
// apply; per-language lists extend them.
struct ScoringConfig {
  std::map<std::string, std::vector<std::string>> articles_by_language;
};

ScoringConfig default_scoring_config();

struct ScoreResult {
  bool correct = false;
  bool unparsed = false;
};

// Letter equality for multiple choice; normalized exact match with article
// stripping for QA. An absent parsed_answer scores false and is flagged.
ScoreResult score(const core::ResponseRecord& record,
                  const ScoringConfig& config = default_scoring_config());

struct ScoringStats {
  std::size_t records = 0;
  std::size_t unparsed = 0;
  std::size_t generation_failed = 0;
};

// Fills parsed_answer and is_correct on every record.
ScoringStats parse_and_score(std::vector<core::ResponseRecord>& records,
                             const ScoringConfig& config = default_scoring_config());

class JoinError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Joins NATIVE and TRANSLATE records on (id, backbone). Records of the other
// strategies are ignored. The label is set only when exactly one side is
// correct. Output is sorted by (backbone, id).
std::vector<core::InstancePair> build_pairs_and_labels(std::span<const core::ResponseRecord> records);

struct SplitSpec {
  double train_fraction = 0.10;
  std::vector<std::string> stratify_keys{"language", "dataset"};
  std::uint64_t seed = 0;

  // Throws core::ConfigError.
  void validate() const;
};

struct SplitResult {
  std::vector<core::InstancePair> train;
  std::vector<core::InstancePair> eval;
};

// Per stratum, floor(train_fraction * n) pairs go to train after a seeded
// shuffle; the rest go to eval. Independent of input order.
SplitResult split(std::span<const core::InstancePair> pairs, const SplitSpec& spec);

}  // namespace promptroute::ingest
