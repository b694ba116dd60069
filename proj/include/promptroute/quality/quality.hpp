#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promptroute/core/resource.hpp"
#include "promptroute/core/types.hpp"
#include "promptroute/eval/report.hpp"

namespace promptroute::quality {

// Character n-gram F-score, orders 1..6, beta 2, whitespace removed, on code
// points. Precision and recall are averaged over the orders where both sides
// have n-grams, then combined. Range [0, 100].
double chrf(std::string_view hypothesis, std::string_view reference);

struct TranslationSections {
  std::optional<std::string> question;
  std::optional<std::string> options;
  std::optional<std::string> context;
};

// Label-keyed parse of the "Translated Question:" / "Translated Options:" /
// "Translated Context:" sections of a translate response. A section runs
// until the next label, "Reasoning:" or the answer line. Returns nullopt when
// the question section is missing, or the options section is missing on a
// multiple-choice record.
std::optional<TranslationSections> extract_translation(const core::ResponseRecord& record);

enum class Metric { chrf, bleurt, meteor };
std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view s);

enum class ScoreSource { computed, ingested };

// English originals the translations are scored against.
struct Reference {
  std::string id;
  std::string question;
  std::vector<std::string> options;
};

std::map<std::string, Reference> read_references(const std::filesystem::path& path);

// Scores keyed by pair key (backbone/id), one table per metric.
class ScoreTable {
 public:
  void set(const std::string& key, Metric metric, double value, ScoreSource source);
  std::optional<double> get(const std::string& key, Metric metric) const;
  std::size_t size(Metric metric) const;
  const std::map<std::string, double>& values(Metric metric) const;

 private:
  std::map<Metric, std::map<std::string, double>> values_;
  std::map<Metric, ScoreSource> sources_;
};

struct ChrfRun {
  std::size_t scored = 0;
  std::size_t excluded = 0;  // translate response without extractable sections
  std::size_t no_reference = 0;
  std::vector<std::string> excluded_ids;
};

// chrF of translated question + options against the English reference, for
// every pair whose translate response parses. Parallel over pairs.
ChrfRun score_chrf(std::span<const core::InstancePair> pairs, const std::map<std::string, Reference>& refs,
                   ScoreTable& table, unsigned threads = 0);

// Ingests CSV (id, metric, value[, backbone]) for bleurt/meteor. Without a
// backbone column a row applies to that id under every backbone in
// `pairs`. chrF rows are rejected: chrF is always computed here.
std::size_t ingest_scores(const std::filesystem::path& path, std::span<const core::InstancePair> pairs,
                          ScoreTable& table);
std::size_t ingest_scores(std::istream& in, const std::string& source, std::span<const core::InstancePair> pairs,
                          ScoreTable& table);

void write_scores(std::ostream& out, const ScoreTable& table);

// Missing scores for a metric.
class MissingScores : public core::DataError {
 public:
  MissingScores(const std::string& what, std::vector<std::string> keys)
      : core::DataError(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

struct PercentileRow {
  int percentile = 0;
  eval::Tally tally;
  double gap() const { return tally.acc_translate() - tally.acc_native(); }
};

struct PercentileTable {
  std::string backbone;
  core::Dataset dataset = core::Dataset::custom;
  Metric metric = Metric::chrf;
  std::vector<PercentileRow> rows;  // 10, 20, ..., 100
};

// Cumulative bottom-p% statistics, ascending by (score, key). With
// per_language, each language contributes its own bottom ceil(p*n_l/100).
// Throws MissingScores.
PercentileTable percentile_table(std::span<const eval::RoutedPair> routed, const ScoreTable& scores,
                                 Metric metric, bool per_language = false);

// One table per (backbone, dataset) present in `routed`.
std::vector<PercentileTable> percentile_tables(std::span<const eval::RoutedPair> routed,
                                               const ScoreTable& scores, Metric metric,
                                               bool per_language = false);

struct ResourceBins {
  std::string backbone;
  core::Dataset dataset = core::Dataset::custom;
  Metric metric = Metric::chrf;
  std::vector<core::ResourceLevel> levels;          // levels with instances
  std::vector<std::array<std::size_t, 10>> counts;  // per level
  std::size_t unmapped = 0;                         // excluded: no resource level

  std::array<double, 10> percent(std::size_t level_index) const;
};

// Equal-count deciles over all mapped instances (bin = floor(rank*10/N)),
// then each level's share per bin. Throws MissingScores.
ResourceBins resource_bin_distribution(std::span<const eval::RoutedPair> routed, const ScoreTable& scores,
                                       Metric metric, const core::ResourceMap& resources = {});

void write_percentile_csv(std::ostream& out, std::span<const PercentileTable> tables);
// Tables sharing dataset and metric are merged with one column per backbone.
void write_percentile_markdown(std::ostream& out, std::span<const PercentileTable> tables);
void write_resource_bins_csv(std::ostream& out, std::span<const ResourceBins> bins);

}  // namespace promptroute::quality
