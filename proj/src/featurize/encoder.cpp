#include "promptroute/featurize/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/hash.hpp"
#include "promptroute/core/text.hpp"

namespace promptroute::featurize {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "promptroute-encoder";
constexpr int kFormatVersion = 1;

std::vector<std::string> sorted_unique(std::set<std::string> s) { return {s.begin(), s.end()}; }

}  // namespace

std::string_view to_string(Tokenizer t) { return t == Tokenizer::icu ? "icu" : "whitespace"; }
std::string_view to_string(RareMode m) { return m == RareMode::median ? "median" : "rank"; }

FeatureEncoder FeatureEncoder::fit(std::span<const core::InstancePair> train, const EncoderOptions& options) {
  if (train.empty()) throw core::DataError("cannot fit the feature encoder on an empty training set");
  FeatureEncoder e;
  e.options_ = options;
  std::set<std::string> langs, datasets, subjects;
  std::map<std::string, std::uint64_t> counts;
  for (const auto& p : train) {
    langs.insert(p.language);
    datasets.insert(std::string(core::to_string(p.dataset)));
    subjects.insert(p.subject);
    for (const std::string* text : {&p.question, &p.native.response_text, &p.translate.response_text}) {
      for (auto& tok : e.tokenize(*text)) ++counts[tok];
    }
  }
  e.languages_ = sorted_unique(std::move(langs));
  e.datasets_ = sorted_unique(std::move(datasets));
  e.subjects_ = sorted_unique(std::move(subjects));
  e.frequency_.assign(counts.begin(), counts.end());
  std::stable_sort(e.frequency_.begin(), e.frequency_.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  e.finalize();
  return e;
}

void FeatureEncoder::finalize() {
  rank_.clear();
  for (std::size_t i = 0; i < frequency_.size(); ++i) rank_.emplace(frequency_[i].first, i + 1);
  median_count_ = 0.0;
  if (!frequency_.empty()) {
    // frequency_ is sorted descending, so the middle element(s) give the median.
    const std::size_t n = frequency_.size();
    const double hi = static_cast<double>(frequency_[(n - 1) / 2].second);
    const double lo = static_cast<double>(frequency_[n / 2].second);
    median_count_ = 0.5 * (hi + lo);
  }
  version_.clear();
  version_ = core::sha256_hex(to_json().dump()).substr(0, 16);
}

std::vector<std::string> FeatureEncoder::tokenize(std::string_view text) const {
  return options_.tokenizer == Tokenizer::icu ? core::icu_word_tokens(text) : core::word_tokens(text);
}

bool FeatureEncoder::is_rare(const std::string& token) const {
  auto it = rank_.find(token);
  if (it == rank_.end()) return true;
  if (options_.rare_mode == RareMode::median) {
    return static_cast<double>(frequency_[it->second - 1].second) < median_count_;
  }
  return it->second > options_.rare_rank_threshold;
}

json FeatureEncoder::to_json() const {
  json freq = json::array();
  for (const auto& [tok, n] : frequency_) freq.push_back(json::array({tok, n}));
  return json{{"format", kFormat},
              {"format_version", kFormatVersion},
              {"tokenizer", to_string(options_.tokenizer)},
              {"rare_mode", to_string(options_.rare_mode)},
              {"rare_rank_threshold", options_.rare_rank_threshold},
              {"languages", languages_},
              {"datasets", datasets_},
              {"subjects", subjects_},
              {"frequency", freq}};
}

FeatureEncoder FeatureEncoder::from_json(const json& j) {
  try {
    if (j.at("format") != kFormat || j.at("format_version") != kFormatVersion) {
      throw core::DataError("not a version-1 feature encoder file");
    }
    FeatureEncoder e;
    const std::string tok = j.at("tokenizer").get<std::string>();
    if (tok != "icu" && tok != "whitespace") throw core::DataError("unknown tokenizer '" + tok + "'");
    e.options_.tokenizer = tok == "icu" ? Tokenizer::icu : Tokenizer::whitespace;
    const std::string mode = j.at("rare_mode").get<std::string>();
    if (mode != "median" && mode != "rank") throw core::DataError("unknown rare_mode '" + mode + "'");
    e.options_.rare_mode = mode == "median" ? RareMode::median : RareMode::rank;
    e.options_.rare_rank_threshold = j.at("rare_rank_threshold").get<std::size_t>();
    e.languages_ = j.at("languages").get<std::vector<std::string>>();
    e.datasets_ = j.at("datasets").get<std::vector<std::string>>();
    e.subjects_ = j.at("subjects").get<std::vector<std::string>>();
    for (const auto& entry : j.at("frequency")) {
      e.frequency_.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<std::uint64_t>());
    }
    e.finalize();
    return e;
  } catch (const json::exception& ex) {
    throw core::DataError(std::string("malformed encoder file: ") + ex.what());
  }
}

void FeatureEncoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::InputError("cannot write " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw core::InputError("write failed: " + path.string());
}

FeatureEncoder FeatureEncoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::InputError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw core::DataError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace promptroute::featurize
