#include <algorithm>

#include "promptroute/core/parallel.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/ingest/ingest.hpp"

namespace promptroute::ingest {

using core::ResponseRecord;
using core::TaskKind;

namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Markdown emphasis, quotes, bullets and other non-alphanumeric decoration
// around the answer line, including multi-byte punctuation.
std::string_view strip_decoration(std::string_view s) {
  while (!s.empty() && !is_ascii_alnum(s.front())) s.remove_prefix(1);
  while (!s.empty() && !is_ascii_alnum(s.back())) s.remove_suffix(1);
  return s;
}

bool starts_with_answer(std::string_view s) {
  return s.size() >= 6 && core::to_lower_ascii(s.substr(0, 6)) == "answer";
}

std::optional<char> mc_letter(std::string_view line) {
  std::string_view s = strip_decoration(line);
  if (!starts_with_answer(s)) return std::nullopt;
  s.remove_prefix(6);
  // Separator: whitespace, colon (ASCII or fullwidth), dash, opening bracket.
  std::size_t i = 0;
  while (i < s.size() && !is_ascii_alnum(s[i])) ++i;
  if (i == 0) return std::nullopt;  // "Answers", "Answered", ...
  s.remove_prefix(i);
  if (s.size() != 1 || !is_ascii_letter(s[0])) return std::nullopt;
  return static_cast<char>(s[0] >= 'a' ? s[0] - 'a' + 'A' : s[0]);
}

std::optional<std::string> qa_remainder(std::string_view line) {
  std::string_view s = core::trim_ascii(line);
  while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '-' || s.front() == '>')) {
    s.remove_prefix(1);
    s = core::trim_ascii(s);
  }
  if (!starts_with_answer(s)) return std::nullopt;
  s.remove_prefix(6);
  while (!s.empty() && s.front() == '*') s.remove_prefix(1);
  if (s.empty() || s.front() != ':') return std::nullopt;
  s.remove_prefix(1);
  while (!s.empty() && s.front() == '*') s.remove_prefix(1);
  s = core::trim_ascii(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  return core::normalize_text(s);
}

const std::vector<std::string> kEnglishArticles{"a", "an", "the"};

std::string strip_for_match(std::string_view text, const std::vector<std::string>& articles) {
  std::u32string s = core::decode_utf8(core::normalize_text(text));
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (core::is_punctuation(s[b]) || s[b] == U' ')) ++b;
  while (e > b && (core::is_punctuation(s[e - 1]) || s[e - 1] == U' ')) --e;
  std::string out = core::encode_utf8(s.substr(b, e - b));
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const auto& article : articles) {
      const std::string prefix = article + " ";
      if (out.size() > prefix.size() && out.compare(0, prefix.size(), prefix) == 0) {
        out.erase(0, prefix.size());
        stripped = true;
      }
    }
  }
  return out;
}

}  // namespace

std::optional<std::string> parse_answer(const ResponseRecord& record) {
  const auto lines = core::split_lines(record.response_text);
  if (core::task_kind(record) == TaskKind::multiple_choice) {
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
      const auto letter = mc_letter(*it);
      if (!letter) continue;
      const auto index = core::option_index(*letter);
      if (index && *index < record.options.size()) return std::string(1, *letter);
    }
    return std::nullopt;
  }
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto rest = qa_remainder(*it);
    if (!rest) continue;
    if (!rest->empty()) return rest;
    // "Answer:" alone on its line: take the next nonempty line.
    for (auto next = it.base(); next != lines.end(); ++next) {
      std::string norm = core::normalize_text(*next);
      if (!norm.empty()) return norm;
    }
  }
  return std::nullopt;
}

ScoringConfig default_scoring_config() {
  ScoringConfig c;
  c.articles_by_language = {
      {"es", {"el", "la", "los", "las", "un", "una", "unos", "unas"}},
      {"de", {"der", "die", "das", "den", "dem", "des", "ein", "eine", "einen", "einem", "einer"}},
  };
  return c;
}

ScoreResult score(const ResponseRecord& record, const ScoringConfig& config) {
  if (!record.parsed_answer) return {false, true};
  if (core::task_kind(record) == TaskKind::multiple_choice) {
    const auto& a = *record.parsed_answer;
    const bool same = a.size() == 1 && record.gold.size() == 1 &&
                      core::option_index(a[0]) == core::option_index(record.gold[0]) &&
                      core::option_index(a[0]).has_value();
    return {same, false};
  }
  std::vector<std::string> articles = kEnglishArticles;
  if (auto it = config.articles_by_language.find(record.language);
      it != config.articles_by_language.end()) {
    articles.insert(articles.end(), it->second.begin(), it->second.end());
  }
  return {strip_for_match(*record.parsed_answer, articles) == strip_for_match(record.gold, articles),
          false};
}

ScoringStats parse_and_score(std::vector<ResponseRecord>& records, const ScoringConfig& config) {
  std::vector<char> unparsed(records.size(), 0);
  core::parallel_for(records.size(), [&](std::size_t i) {
    ResponseRecord& r = records[i];
    r.parsed_answer = r.response_text.empty() ? std::nullopt : parse_answer(r);
    const ScoreResult s = score(r, config);
    r.is_correct = s.correct;
    unparsed[i] = s.unparsed ? 1 : 0;
  });
  ScoringStats stats;
  stats.records = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    stats.unparsed += static_cast<std::size_t>(unparsed[i]);
    if (records[i].generation_failed) ++stats.generation_failed;
  }
  return stats;
}

}  // namespace promptroute::ingest
