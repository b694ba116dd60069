#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptroute/annotations/store.hpp"
#include "promptroute/core/errors.hpp"
#include "promptroute/core/types.hpp"
#include "promptroute/eval/wilcoxon.hpp"
#include "promptroute/featurize/encoder.hpp"
#include "promptroute/learners/model.hpp"

namespace promptroute::eval {

// One evaluated pair after the router has decided.
struct RoutedPair {
  std::string id;
  std::string backbone;
  core::Dataset dataset = core::Dataset::custom;
  std::string language;
  bool native_correct = false;
  bool translate_correct = false;
  bool native_unparsed = false;
  bool translate_unparsed = false;
  std::optional<core::Route> label;
  double p_translate = 0.0;
  core::Route decision = core::Route::native;

  bool classifier_correct() const {
    return decision == core::Route::translate ? translate_correct : native_correct;
  }
  bool oracle_correct() const { return native_correct || translate_correct; }
  std::string key() const { return backbone + "/" + id; }
  bool operator==(const RoutedPair&) const = default;
};

RoutedPair make_routed(const core::InstancePair& pair, double p_translate);

// Model feature space differs from the encoder's.
class EncoderMismatch : public core::DataError {
 public:
  using core::DataError::DataError;
};

// Routes every pair, labeled or not. Parallel over pairs; output order follows
// the input.
std::vector<RoutedPair> route(const learners::TrainedModel& model, std::span<const core::InstancePair> pairs,
                              const featurize::FeatureEncoder& encoder,
                              const annotations::AnnotationStore& store, unsigned threads = 0);

// Same, with any probability-of-translate function as the router.
std::vector<RoutedPair> route_with(std::span<const core::InstancePair> pairs,
                                   const std::function<double(const core::InstancePair&)>& p_translate,
                                   unsigned threads = 0);

void write_routed(std::ostream& out, std::span<const RoutedPair> routed);
void write_routed(const std::filesystem::path& path, std::span<const RoutedPair> routed);
std::vector<RoutedPair> read_routed(const std::filesystem::path& path);

// Counts for one group of pairs. Accuracies are fractions in [0,1].
struct Tally {
  std::size_t n = 0;
  std::size_t native = 0;
  std::size_t translate = 0;
  std::size_t classifier = 0;
  std::size_t oracle = 0;
  std::size_t routed_translate = 0;
  std::size_t native_unparsed = 0;
  std::size_t translate_unparsed = 0;

  void add(const RoutedPair& r);
  double acc_native() const;
  double acc_translate() const;
  double acc_classifier() const;
  double acc_oracle() const;
  double translate_rate() const;
};

struct Cell {
  std::string backbone;
  core::Dataset dataset = core::Dataset::custom;
  std::string language;
  Tally tally;
};

// Unweighted means of cell accuracies (fractions).
struct Averages {
  std::size_t cells = 0;
  double native = 0.0;
  double translate = 0.0;
  double classifier = 0.0;
  double oracle = 0.0;
  double translate_rate = 0.0;
};

struct DatasetSummary {
  std::string backbone;
  core::Dataset dataset = core::Dataset::custom;
  Averages average;  // over the dataset's languages
  Tally pooled;
};

struct BackboneSummary {
  std::string backbone;
  Averages average;  // over every (dataset, language) cell
  Tally pooled;
};

struct Comparison {
  std::string backbone;
  std::string name;  // e.g. "classifier vs translate"
  WilcoxonResult result;
};

struct EvalReport {
  std::vector<Cell> cells;  // by backbone, dataset, language column order
  std::vector<DatasetSummary> datasets;
  std::vector<BackboneSummary> backbones;
  std::vector<Comparison> significance;
};

// Throws core::DataError on empty input. Significance compares the classifier
// against each fixed strategy over per-cell accuracies, pooled across datasets.
EvalReport build_report(std::span<const RoutedPair> routed, WilcoxonMode mode = WilcoxonMode::automatic);

// Evaluated languages first (high, mid, low), then any others alphabetically.
std::vector<std::string> language_columns(const std::vector<std::string>& present);

// Per-cell accuracies in long form (backbone, dataset, language, method,
// accuracy in percent). Reads the shape the report CSV writers emit and the
// published-table fixtures use; rows whose language is "avg" are skipped.
struct AccuracyRow {
  std::string backbone;
  std::string dataset;
  std::string language;
  std::string method;
  double accuracy = 0.0;
};

std::vector<AccuracyRow> read_accuracy_table(std::istream& in, const std::string& source = "<stream>");
std::vector<AccuracyRow> read_accuracy_table(const std::filesystem::path& path);
std::vector<AccuracyRow> accuracy_rows(const EvalReport& report);

// Pairs method_a and method_b on (dataset, language) for one backbone. Cells
// missing either method are skipped. Throws core::DataError when nothing pairs.
WilcoxonResult compare_methods(std::span<const AccuracyRow> rows, const std::string& backbone,
                               const std::string& method_a, const std::string& method_b,
                               WilcoxonMode mode = WilcoxonMode::automatic);

// Percent with one decimal, half-up. Fractions in [0,1] in.
std::string format_percent(double fraction);
// p-values as in the published significance table: six decimals, or
// scientific below 1e-6.
std::string format_p(double p);

void write_report_csv(std::ostream& out, const EvalReport& report);
void write_accuracy_csv(std::ostream& out, const EvalReport& report);
void write_significance_csv(std::ostream& out, std::span<const Comparison> comparisons);
// Accuracy table grouped by resource level, "--" for uncovered cells, then
// the translate selection rates and the significance results.
void write_report_markdown(std::ostream& out, const EvalReport& report);

}  // namespace promptroute::eval
