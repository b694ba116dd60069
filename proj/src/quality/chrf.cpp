#include <map>

#include "promptroute/core/text.hpp"
#include "promptroute/quality/quality.hpp"

namespace promptroute::quality {

namespace {

constexpr int kMaxOrder = 6;
constexpr double kBeta = 2.0;

std::u32string strip_whitespace(std::string_view text) {
  std::u32string out;
  for (char32_t cp : core::decode_utf8(text)) {
    if (!core::is_whitespace(cp)) out.push_back(cp);
  }
  return out;
}

std::map<std::u32string, int> ngrams(const std::u32string& s, std::size_t n) {
  std::map<std::u32string, int> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

}  // namespace

double chrf(std::string_view hypothesis, std::string_view reference) {
  const std::u32string hyp = strip_whitespace(hypothesis);
  const std::u32string ref = strip_whitespace(reference);
  double precision = 0.0, recall = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    if (hyp.size() < n || ref.size() < n) break;
    const auto h = ngrams(hyp, n);
    const auto r = ngrams(ref, n);
    long matched = 0;
    for (const auto& [gram, count] : h) {
      const auto it = r.find(gram);
      if (it != r.end()) matched += std::min(count, it->second);
    }
    precision += static_cast<double>(matched) / static_cast<double>(hyp.size() - n + 1);
    recall += static_cast<double>(matched) / static_cast<double>(ref.size() - n + 1);
    ++orders;
  }
  if (orders == 0) return 0.0;
  precision /= orders;
  recall /= orders;
  if (precision + recall == 0.0) return 0.0;
  const double b2 = kBeta * kBeta;
  return 100.0 * (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

}  // namespace promptroute::quality
