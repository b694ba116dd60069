#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/jsonl.hpp"

namespace promptroute::annotations {

enum class PairKind { answer_response, question_answer, question_response };

std::string_view to_string(PairKind k);
std::optional<PairKind> parse_pair_kind(std::string_view s);

// One annotated text. A null field means the annotator could not produce that
// group for this text; it is masked downstream rather than imputed silently.
struct AnnotationBundle {
  std::string text_key;
  std::optional<std::int64_t> named_entity_count;
  std::optional<std::vector<std::string>> pos_tags;  // Universal POS
  std::optional<std::int64_t> token_count;           // must equal pos_tags size when both present
  std::optional<std::int64_t> syntactic_depth_max;
  std::optional<double> syntactic_depth_mean;
  std::optional<std::string> lang_detected;
  std::optional<double> lang_confidence;
  // Cosines for the response this text belongs to; pair lines take precedence.
  std::optional<double> embed_sim_answer_response;
  std::optional<double> embed_sim_question_answer;
  std::optional<double> embed_sim_question_response;

  bool operator==(const AnnotationBundle&) const = default;
};

nlohmann::json to_json(const AnnotationBundle& b);

// Presence of each annotation group after resolve(); 1 = annotator value used.
struct AnnotationMask {
  bool ner = false;
  bool pos = false;
  bool depth = false;
  bool langid = false;
};

struct ResolvedAnnotation {
  std::int64_t named_entity_count = 0;
  std::vector<std::string> pos_tags;
  std::int64_t syntactic_depth_max = 0;
  std::string lang_detected;
  double lang_confidence = 0.0;
  AnnotationMask mask;
};

struct Coverage {
  std::size_t bundles = 0;
  std::size_t similarity_pairs = 0;
  std::size_t with_ner = 0;
  std::size_t with_pos = 0;
  std::size_t with_depth = 0;
  std::size_t with_langid = 0;
};

class AnnotationLoadError : public core::DataError {
 public:
  AnnotationLoadError(const std::string& source, std::vector<core::Issue> issues);
  const std::vector<core::Issue>& issues() const { return issues_; }

 private:
  std::vector<core::Issue> issues_;
};

// Immutable after construction; lookups are safe from any thread.
class AnnotationStore {
 public:
  AnnotationStore() = default;
  // Throws AnnotationLoadError listing every invalid bundle.
  AnnotationStore(std::vector<AnnotationBundle> bundles,
                  std::map<std::tuple<std::string, std::string, PairKind>, double> similarities,
                  std::map<std::string, std::string> tools);

  const AnnotationBundle* find(const std::string& text_key) const;
  std::optional<double> find_similarity(const std::string& key_a, const std::string& key_b,
                                        PairKind kind) const;

  std::size_t size() const { return bundles_.size(); }
  const std::map<std::string, std::string>& tools() const { return tools_; }
  const Coverage& coverage() const { return coverage_; }
  // Bundles in key order, for writing.
  const std::map<std::string, AnnotationBundle>& bundles() const { return bundles_; }
  const std::map<std::tuple<std::string, std::string, PairKind>, double>& similarities() const {
    return similarities_;
  }

 private:
  std::map<std::string, AnnotationBundle> bundles_;
  std::map<std::tuple<std::string, std::string, PairKind>, double> similarities_;
  std::map<std::string, std::string> tools_;
  Coverage coverage_;
};

// Problems with a single bundle; empty when valid.
std::vector<core::Issue> validate_bundle(const AnnotationBundle& b, std::size_t line = 0);

AnnotationStore load_annotations(std::istream& in, const std::string& source = "<stream>");
AnnotationStore load_annotations(const std::filesystem::path& path);
void write_annotations(std::ostream& out, const AnnotationStore& store);

// Stored bundle on a hit; zeros with an all-false mask on a miss. Null fields
// of a stored bundle are zeroed and masked individually.
ResolvedAnnotation resolve(const AnnotationStore& store, std::string_view text);

// Cosine between two texts: a pair line if present, otherwise the matching
// embed_sim field of the response's bundle.
std::optional<double> resolve_similarity(const AnnotationStore& store, std::string_view a,
                                         std::string_view b, std::string_view response,
                                         PairKind kind);

// Work order for the annotation sidecar.
struct RequestText {
  std::string text_key;
  std::string text;
  std::string expected_language;
};

struct RequestPair {
  std::string key_a;
  std::string key_b;
  PairKind kind = PairKind::question_response;
};

class AnnotationRequest {
 public:
  // Deduplicates by key; the first expected language seen for a key wins.
  // Empty texts are skipped.
  void add_text(std::string_view text, const std::string& expected_language);
  void add_pair(std::string_view a, std::string_view b, PairKind kind);

  const std::vector<RequestText>& texts() const { return texts_; }
  const std::vector<RequestPair>& pairs() const { return pairs_; }

 private:
  std::vector<RequestText> texts_;
  std::vector<RequestPair> pairs_;
  std::set<std::string> text_keys_;
  std::set<std::tuple<std::string, std::string, PairKind>> pair_keys_;
};

void write_request(std::ostream& out, const AnnotationRequest& request);

}  // namespace promptroute::annotations
