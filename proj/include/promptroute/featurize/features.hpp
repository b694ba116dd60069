#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "promptroute/annotations/store.hpp"
#include "promptroute/core/types.hpp"
#include "promptroute/featurize/encoder.hpp"

namespace promptroute::featurize {

using NamedValues = std::vector<std::pair<std::string, double>>;

// count / (code point length + 1).
double punct_density(std::string_view text);
double numeric_density(std::string_view text);

// Response-level statistics, in a fixed order. Annotation-backed entries are
// zero when the annotator produced nothing for this text.
NamedValues text_stats(std::string_view text, const FeatureEncoder& encoder,
                       const annotations::ResolvedAnnotation& annotation,
                       std::string_view expected_language);

// Convenience overload resolving the annotation from a store.
NamedValues text_stats(std::string_view text, const FeatureEncoder& encoder,
                       const annotations::AnnotationStore& store, std::string_view expected_language);

struct Overlap {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Type-set overlap; precision over a's types, recall over b's.
Overlap word_overlap(std::string_view a, std::string_view b, Tokenizer tokenizer = Tokenizer::whitespace);

// The chosen option text (multiple choice) or the parsed span (QA); empty when
// nothing parses.
std::string extracted_answer(const core::ResponseRecord& record);

// Language each response is expected to be written in.
std::string expected_language(const core::InstancePair& pair, core::Strategy side);

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::string encoder_version;

  std::optional<double> get(std::string_view name) const;
};

std::vector<std::string> feature_names(const FeatureEncoder& encoder);

FeatureVector featurize_pair(const core::InstancePair& pair, const FeatureEncoder& encoder,
                             const annotations::AnnotationStore& store);

// metadata, question, response, alignment or mask.
std::string feature_group(std::string_view name);

struct FeatureMatrix {
  std::vector<std::string> names;
  std::string encoder_version;
  std::vector<std::string> keys;  // pair key (backbone/id)
  std::vector<std::optional<core::Route>> labels;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
};

FeatureMatrix featurize_all(std::span<const core::InstancePair> pairs, const FeatureEncoder& encoder,
                            const annotations::AnnotationStore& store, unsigned threads = 0);

enum class MatrixFormat { csv, jsonl };

void write_matrix(std::ostream& out, const FeatureMatrix& m, MatrixFormat format);
FeatureMatrix read_matrix(std::istream& in, MatrixFormat format, const std::string& source = "<stream>");
void write_matrix(const std::filesystem::path& path, const FeatureMatrix& m, MatrixFormat format);
FeatureMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format);
// Chooses the format from the extension (.csv, otherwise JSONL).
MatrixFormat format_for(const std::filesystem::path& path);

// Every text and alignment pair featurize_pair will look up.
annotations::AnnotationRequest build_annotation_request(std::span<const core::InstancePair> pairs);

}  // namespace promptroute::featurize
