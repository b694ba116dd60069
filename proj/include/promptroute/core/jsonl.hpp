#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptroute/core/types.hpp"

namespace promptroute::core {

inline constexpr int kSchemaVersion = 1;

// A located problem in an input file or record set.
struct Issue {
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  std::string id;
  std::string field;
  std::string message;

  std::string describe() const;
  bool operator==(const Issue&) const = default;
};

struct JsonlRow {
  std::size_t line = 0;
  nlohmann::json value;
};

// Line 1 must be a header object carrying "schema": 1. Blank lines are
// skipped; lines that fail to parse are reported as issues.
struct JsonlDocument {
  nlohmann::json header;
  std::vector<JsonlRow> rows;
  std::vector<Issue> issues;
};

// Throws InputError when the stream/file cannot be read and DataError when the
// header is missing or carries the wrong schema.
JsonlDocument read_jsonl(std::istream& in, const std::string& source);
JsonlDocument read_jsonl(const std::filesystem::path& path);

void write_jsonl(std::ostream& out, const nlohmann::json& header,
                 const std::vector<nlohmann::json>& rows);

nlohmann::json to_json(const ResponseRecord& r);
// Field problems are appended to `issues`; nullopt when a required field is
// unusable.
std::optional<ResponseRecord> record_from_json(const nlohmann::json& j, std::size_t line,
                                               std::vector<Issue>& issues);

nlohmann::json to_json(const InstancePair& p);
InstancePair pair_from_json(const nlohmann::json& j);  // throws DataError

struct LogReadResult {
  std::vector<ResponseRecord> records;
  std::vector<Issue> issues;
};

LogReadResult read_log(std::istream& in, const std::string& source = "<stream>");
LogReadResult read_log(const std::filesystem::path& path);
void write_log(std::ostream& out, const std::vector<ResponseRecord>& records);

std::vector<InstancePair> read_pairs(const std::filesystem::path& path);
void write_pairs(std::ostream& out, const std::vector<InstancePair>& pairs);

}  // namespace promptroute::core
