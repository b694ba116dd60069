#include "promptroute/featurize/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "promptroute/core/parallel.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/ingest/ingest.hpp"

namespace promptroute::featurize {

using annotations::PairKind;
using core::Strategy;

namespace {

constexpr std::string_view kResponseFeatures[] = {
    "punct_density",
    "numeric_density",
    "rare_word_ratio",
    "lexical_diversity",
    "grammar_malformed_punct",
    "grammar_missing_final_period",
    "grammar_fluency_score",
    "named_entity_count",
    "language_detection_confidence",
    "language_mismatch",
    "syntactic_depth_max",
    "syntactic_complexity_score",
    "pos_noun_verb_ratio",
    "pos_diversity_unique_tags",
    "pos_diversity_score",
};

constexpr PairKind kPairKinds[] = {PairKind::answer_response, PairKind::question_answer,
                                   PairKind::question_response};

constexpr std::string_view kMaskGroups[] = {"ner", "pos", "depth", "langid"};

template <typename Pred>
double density(std::string_view text, Pred pred) {
  const std::u32string cps = core::decode_utf8(text);
  if (cps.empty()) return 0.0;
  const auto count = std::count_if(cps.begin(), cps.end(), pred);
  return static_cast<double>(count) / static_cast<double>(cps.size() + 1);
}

std::size_t malformed_runs(const std::u32string& cps) {
  std::size_t runs = 0;
  for (std::size_t i = 0; i < cps.size();) {
    std::size_t j = i + 1;
    while (j < cps.size() && cps[j] == cps[i]) ++j;
    if (j - i >= 2 && core::is_sentence_terminal(cps[i])) ++runs;
    i = j;
  }
  return runs;
}

double missing_final_period(const std::u32string& cps) {
  std::size_t end = cps.size();
  while (end > 0 && core::is_whitespace(cps[end - 1])) --end;
  if (end == 0) return 0.0;
  std::size_t last = end;
  while (last > 0 && core::is_closing_punctuation(cps[last - 1])) --last;
  if (last == 0) return 1.0;
  return core::is_sentence_terminal(cps[last - 1]) ? 0.0 : 1.0;
}

std::string primary_subtag(std::string_view code) {
  const auto cut = code.find_first_of("-_");
  return core::to_lower_ascii(code.substr(0, cut));
}

// (a, b) for word_overlap: the candidate text first, the reference second.
std::pair<std::string_view, std::string_view> overlap_operands(PairKind kind, std::string_view question,
                                                               std::string_view answer,
                                                               std::string_view response) {
  switch (kind) {
    case PairKind::answer_response:
      return {response, answer};
    case PairKind::question_answer:
      return {answer, question};
    case PairKind::question_response:
      return {response, question};
  }
  return {};
}

// (first, second) in the order the pair kind names them.
std::pair<std::string_view, std::string_view> embed_operands(PairKind kind, std::string_view question,
                                                             std::string_view answer,
                                                             std::string_view response) {
  switch (kind) {
    case PairKind::answer_response:
      return {answer, response};
    case PairKind::question_answer:
      return {question, answer};
    case PairKind::question_response:
      return {question, response};
  }
  return {};
}

struct SideFeatures {
  NamedValues response;   // response-level and alignment, diffed
  NamedValues masks;
};

SideFeatures side_features(const core::InstancePair& pair, Strategy side, const FeatureEncoder& encoder,
                           const annotations::AnnotationStore& store) {
  const core::ResponseRecord& r = side == Strategy::native ? pair.native : pair.translate;
  const std::string expected = expected_language(pair, side);
  const std::string answer = extracted_answer(r);
  const auto resolved = annotations::resolve(store, r.response_text);

  SideFeatures out;
  out.response = text_stats(r.response_text, encoder, resolved, expected);
  for (PairKind kind : kPairKinds) {
    const std::string k(annotations::to_string(kind));
    const auto [a, b] = overlap_operands(kind, r.question, answer, r.response_text);
    const Overlap o = word_overlap(a, b, encoder.options().tokenizer);
    out.response.emplace_back("word_overlap_" + k + "_precision", o.precision);
    out.response.emplace_back("word_overlap_" + k + "_recall", o.recall);
    out.response.emplace_back("word_overlap_" + k + "_f1", o.f1);
    const auto [first, second] = embed_operands(kind, r.question, answer, r.response_text);
    const auto cosine = annotations::resolve_similarity(store, first, second, r.response_text, kind);
    out.response.emplace_back("embed_" + k + "_similarity", cosine.value_or(0.0));
    out.masks.emplace_back("embed_" + k, cosine ? 1.0 : 0.0);
  }
  out.masks.insert(out.masks.begin(), {{"ner", resolved.mask.ner ? 1.0 : 0.0},
                                       {"pos", resolved.mask.pos ? 1.0 : 0.0},
                                       {"depth", resolved.mask.depth ? 1.0 : 0.0},
                                       {"langid", resolved.mask.langid ? 1.0 : 0.0}});
  return out;
}

void one_hot(std::vector<std::string>& names, std::string_view field, const std::vector<std::string>& vocab) {
  for (const auto& v : vocab) names.push_back("meta." + std::string(field) + "=" + v);
  names.push_back("meta." + std::string(field) + "=" + std::string(kUnknown));
}

void one_hot_values(std::vector<double>& values, const std::vector<std::string>& vocab, const std::string& v) {
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), v);
  const bool known = it != vocab.end() && *it == v;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    values.push_back(known && static_cast<std::size_t>(it - vocab.begin()) == i ? 1.0 : 0.0);
  }
  values.push_back(known ? 0.0 : 1.0);
}

}  // namespace

double punct_density(std::string_view text) { return density(text, core::is_punctuation); }
double numeric_density(std::string_view text) { return density(text, core::is_decimal_digit); }

NamedValues text_stats(std::string_view text, const FeatureEncoder& encoder,
                       const annotations::ResolvedAnnotation& a, std::string_view expected_language) {
  const std::u32string cps = core::decode_utf8(text);
  const std::vector<std::string> tokens = encoder.tokenize(text);

  double rare = 0.0;
  double diversity = 0.0;
  if (!tokens.empty()) {
    const auto n_rare = std::count_if(tokens.begin(), tokens.end(),
                                      [&](const std::string& t) { return encoder.is_rare(t); });
    rare = static_cast<double>(n_rare) / static_cast<double>(tokens.size());
    const std::set<std::string> types(tokens.begin(), tokens.end());
    diversity = static_cast<double>(types.size()) / static_cast<double>(tokens.size());
  }

  const auto malformed = static_cast<double>(malformed_runs(cps));
  const double missing = missing_final_period(cps);
  const bool blank = std::all_of(cps.begin(), cps.end(), core::is_whitespace);
  const double fluency = blank ? 0.0 : std::clamp(1.0 - 0.18 * malformed - 0.10 * missing, 0.0, 1.0);

  double mismatch = 0.0;
  if (a.mask.langid) mismatch = primary_subtag(a.lang_detected) != primary_subtag(expected_language) ? 1.0 : 0.0;

  const auto depth = static_cast<double>(a.syntactic_depth_max);
  const double complexity =
      tokens.empty() ? 0.0 : depth / std::log2(static_cast<double>(tokens.size()) + 1.0);

  double noun_verb = 0.0;
  double unique_tags = 0.0;
  double pos_diversity = 0.0;
  if (!a.pos_tags.empty()) {
    const auto nouns = std::count_if(a.pos_tags.begin(), a.pos_tags.end(),
                                     [](const std::string& t) { return t == "NOUN" || t == "PROPN"; });
    const auto verbs = std::count(a.pos_tags.begin(), a.pos_tags.end(), "VERB");
    // No verbs: the noun count itself stands in for the ratio.
    noun_verb = verbs == 0 ? static_cast<double>(nouns) : static_cast<double>(nouns) / static_cast<double>(verbs);
    const std::set<std::string> tags(a.pos_tags.begin(), a.pos_tags.end());
    unique_tags = static_cast<double>(tags.size());
    pos_diversity = unique_tags / static_cast<double>(a.pos_tags.size());
  }

  const double values[] = {
      punct_density(text),
      numeric_density(text),
      rare,
      diversity,
      malformed,
      missing,
      fluency,
      static_cast<double>(a.named_entity_count),
      a.lang_confidence,
      mismatch,
      depth,
      complexity,
      noun_verb,
      unique_tags,
      pos_diversity,
  };
  NamedValues out;
  out.reserve(std::size(kResponseFeatures));
  for (std::size_t i = 0; i < std::size(kResponseFeatures); ++i) {
    out.emplace_back(std::string(kResponseFeatures[i]), values[i]);
  }
  return out;
}

NamedValues text_stats(std::string_view text, const FeatureEncoder& encoder,
                       const annotations::AnnotationStore& store, std::string_view expected_language) {
  return text_stats(text, encoder, annotations::resolve(store, text), expected_language);
}

Overlap word_overlap(std::string_view a, std::string_view b, Tokenizer tokenizer) {
  const auto tok = [&](std::string_view s) {
    return tokenizer == Tokenizer::icu ? core::icu_word_tokens(s) : core::word_tokens(s);
  };
  const auto ta = tok(a);
  const auto tb = tok(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() || sb.empty()) return {};
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  if (common == 0) return {};
  Overlap o;
  o.precision = static_cast<double>(common) / static_cast<double>(sa.size());
  o.recall = static_cast<double>(common) / static_cast<double>(sb.size());
  o.f1 = 2.0 * o.precision * o.recall / (o.precision + o.recall);
  return o;
}

std::string extracted_answer(const core::ResponseRecord& record) {
  std::optional<std::string> parsed = record.parsed_answer;
  if (!parsed && !record.response_text.empty()) parsed = ingest::parse_answer(record);
  if (!parsed) return {};
  if (core::task_kind(record) == core::TaskKind::qa) return *parsed;
  if (parsed->size() != 1) return {};
  const auto index = core::option_index((*parsed)[0]);
  if (!index || *index >= record.options.size()) return {};
  return record.options[*index];
}

std::string expected_language(const core::InstancePair& pair, Strategy side) {
  return side == Strategy::translate ? "en" : pair.language;
}

std::optional<double> FeatureVector::get(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  return std::nullopt;
}

std::vector<std::string> feature_names(const FeatureEncoder& encoder) {
  std::vector<std::string> names;
  one_hot(names, "language", encoder.languages());
  one_hot(names, "dataset", encoder.datasets());
  one_hot(names, "subject", encoder.subjects());
  names.emplace_back("question.punct_density");
  names.emplace_back("question.num_density");
  std::vector<std::string> per_response(std::begin(kResponseFeatures), std::end(kResponseFeatures));
  for (PairKind kind : kPairKinds) {
    const std::string k(annotations::to_string(kind));
    for (const char* m : {"_precision", "_recall", "_f1"}) per_response.push_back("word_overlap_" + k + m);
    per_response.push_back("embed_" + k + "_similarity");
  }
  for (const char* prefix : {"native.", "translate.", "diff."}) {
    for (const auto& f : per_response) names.push_back(prefix + f);
  }
  for (const char* side : {"native", "translate"}) {
    for (auto g : kMaskGroups) names.push_back("mask." + std::string(side) + "." + std::string(g));
    for (PairKind kind : kPairKinds) {
      names.push_back("mask." + std::string(side) + ".embed_" + std::string(annotations::to_string(kind)));
    }
  }
  return names;
}

FeatureVector featurize_pair(const core::InstancePair& pair, const FeatureEncoder& encoder,
                             const annotations::AnnotationStore& store) {
  FeatureVector v;
  v.encoder_version = encoder.version();
  v.names = feature_names(encoder);
  v.values.reserve(v.names.size());
  one_hot_values(v.values, encoder.languages(), pair.language);
  one_hot_values(v.values, encoder.datasets(), std::string(core::to_string(pair.dataset)));
  one_hot_values(v.values, encoder.subjects(), pair.subject);
  v.values.push_back(punct_density(pair.question));
  v.values.push_back(numeric_density(pair.question));

  const SideFeatures n = side_features(pair, Strategy::native, encoder, store);
  const SideFeatures t = side_features(pair, Strategy::translate, encoder, store);
  for (const auto& [_, x] : n.response) v.values.push_back(x);
  for (const auto& [_, x] : t.response) v.values.push_back(x);
  for (std::size_t i = 0; i < n.response.size(); ++i) v.values.push_back(t.response[i].second - n.response[i].second);
  for (const auto& [_, x] : n.masks) v.values.push_back(x);
  for (const auto& [_, x] : t.masks) v.values.push_back(x);
  return v;
}

std::string feature_group(std::string_view name) {
  if (name.starts_with("meta.")) return "metadata";
  if (name.starts_with("question.")) return "question";
  if (name.starts_with("mask.")) return "mask";
  const auto dot = name.find('.');
  const std::string_view base = dot == std::string_view::npos ? name : name.substr(dot + 1);
  if (base.starts_with("word_overlap_") || base.starts_with("embed_")) return "alignment";
  return "response";
}

FeatureMatrix featurize_all(std::span<const core::InstancePair> pairs, const FeatureEncoder& encoder,
                            const annotations::AnnotationStore& store, unsigned threads) {
  FeatureMatrix m;
  m.names = feature_names(encoder);
  m.encoder_version = encoder.version();
  m.keys.resize(pairs.size());
  m.labels.resize(pairs.size());
  m.rows.resize(pairs.size());
  core::parallel_for(
      pairs.size(),
      [&](std::size_t i) {
        m.keys[i] = pairs[i].key();
        m.labels[i] = pairs[i].label;
        m.rows[i] = featurize_pair(pairs[i], encoder, store).values;
      },
      threads);
  return m;
}

annotations::AnnotationRequest build_annotation_request(std::span<const core::InstancePair> pairs) {
  annotations::AnnotationRequest req;
  for (const auto& p : pairs) {
    for (Strategy side : {Strategy::native, Strategy::translate}) {
      const core::ResponseRecord& r = side == Strategy::native ? p.native : p.translate;
      const std::string lang = expected_language(p, side);
      const std::string answer = extracted_answer(r);
      req.add_text(r.question, p.language);
      req.add_text(r.response_text, lang);
      req.add_text(answer, lang);
      for (PairKind kind : kPairKinds) {
        const auto [a, b] = embed_operands(kind, r.question, answer, r.response_text);
        req.add_pair(a, b, kind);
      }
    }
  }
  return req;
}

}  // namespace promptroute::featurize
