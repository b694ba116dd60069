#include "synth.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/resource.hpp"
#include "promptroute/core/rng.hpp"

namespace promptroute::synth {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& english_words() {
  static const std::vector<std::string> words = {
      "river",  "market", "energy", "planet", "theory", "garden", "signal", "engine", "winter", "harbor",
      "silver", "forest", "number", "letter", "bridge", "castle", "doctor", "valley", "rocket", "school",
      "window", "summer", "island", "carbon", "animal", "travel", "public", "record", "speech", "weight",
      "motion", "circle", "spirit", "method", "nature", "palace", "season", "temple", "copper", "desert"};
  return words;
}

const std::vector<std::string> kSubjects = {"STEM:mathematics", "STEM:physics", "Humanities:history",
                                            "Social Sciences:economics", "Other:medicine"};

std::string join(const std::vector<std::string>& w, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to && i < w.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += w[i];
  }
  return out;
}

// Native-side surface form of an English word: a per-language spelling that
// shares no tokens across languages.
std::string localize(const std::string& lang, const std::string& word) { return word + lang; }

std::string wrong_letter(core::Rng& rng, const std::string& gold, std::size_t n) {
  for (;;) {
    const std::string l(1, core::option_letter(rng.below(n)));
    if (l != gold) return l;
  }
}

}  // namespace

core::Route planted_route(const CorpusSpec& spec, const std::string& language) {
  return std::find(spec.translate_wins.begin(), spec.translate_wins.end(), language) != spec.translate_wins.end()
             ? core::Route::translate
             : core::Route::native;
}

Corpus make_corpus(const CorpusSpec& spec) {
  const auto languages = spec.languages.empty() ? core::evaluated_languages() : spec.languages;
  const auto& vocab = english_words();
  Corpus out;
  core::Rng rng(spec.seed);
  for (const auto& lang : languages) {
    for (std::size_t i = 0; i < spec.per_language; ++i) {
      const std::string id = lang + "-" + std::to_string(i);
      std::vector<std::string> q;
      const auto len = 6 + rng.below(6);
      for (std::size_t k = 0; k < len; ++k) q.push_back(vocab[rng.below(vocab.size())]);
      std::vector<std::string> opts;
      for (int k = 0; k < 4; ++k) opts.push_back(vocab[rng.below(vocab.size())] + " " + std::to_string(k + 1));
      const std::string gold(1, core::option_letter(rng.below(4)));
      const std::string subject = kSubjects[rng.below(kSubjects.size())];
      const bool low = planted_route(spec, lang) == core::Route::translate;
      const std::string ref_question = join(q, 0, q.size()) + "?";
      out.references.push_back({id, {ref_question, opts}});

      std::vector<std::string> native_q;
      for (const auto& w : q) native_q.push_back(localize(lang, w));
      std::vector<std::string> native_opts;
      for (const auto& o : opts) native_opts.push_back(localize(lang, o));

      // translation quality: share of words garbled, higher where translating wins
      const double garble = low ? rng.uniform(0.0, 0.5) : rng.uniform(0.0, 0.25);
      std::vector<std::string> translated = q;
      for (auto& w : translated) {
        if (rng.bernoulli(garble)) w = vocab[rng.below(vocab.size())];
      }

      for (const auto& backbone : spec.backbones) {
        const bool native_ok = (!low) != rng.bernoulli(spec.noise);
        const bool translate_ok = low != rng.bernoulli(spec.noise);
        const std::size_t native_echo = low ? 1 : 4;
        const std::size_t translate_echo = low ? 4 : 1;

        core::ResponseRecord base;
        base.id = id;
        base.dataset = core::Dataset::global_mmlu;
        base.language = lang;
        base.subject = subject;
        base.backbone = backbone;
        base.question = join(native_q, 0, native_q.size()) + "?";
        base.options = native_opts;
        base.gold = gold;

        auto native = base;
        native.strategy = core::Strategy::native;
        const auto n_answer = native_ok ? gold : wrong_letter(rng, gold, 4);
        native.response_text = "Step by step: " + join(native_q, 0, native_echo) + " so the choice follows.\nAnswer " +
                               n_answer;

        auto translate = base;
        translate.strategy = core::Strategy::translate;
        const auto t_answer = translate_ok ? gold : wrong_letter(rng, gold, 4);
        translate.response_text = "Translated Question: " + join(translated, 0, translated.size()) +
                                  "?\nTranslated Options: " + core::format_options(opts) + "\nReasoning: " +
                                  join(translated, 0, translate_echo) + " points to one option.\nAnswer " + t_answer;
        out.records.push_back(std::move(native));
        out.records.push_back(std::move(translate));
      }
    }
  }
  return out;
}

void write_demo(const fs::path& dir, const CorpusSpec& spec) {
  const auto corpus = make_corpus(spec);
  fs::create_directories(dir / "logs");
  for (const auto& backbone : spec.backbones) {
    std::vector<core::ResponseRecord> mine;
    for (const auto& r : corpus.records) {
      if (r.backbone == backbone) mine.push_back(r);
    }
    std::ofstream out(dir / "logs" / (backbone + ".jsonl"), std::ios::binary);
    core::write_log(out, mine);
    if (!out) throw core::InputError("cannot write " + (dir / "logs").string());
  }
  std::vector<nlohmann::json> rows;
  for (const auto& [id, ref] : corpus.references) {
    rows.push_back({{"id", id}, {"question", ref.first}, {"options", ref.second}});
  }
  {
    std::ofstream out(dir / "references.jsonl", std::ios::binary);
    core::write_jsonl(out, {{"schema", core::kSchemaVersion}, {"kind", "references"}}, rows);
  }
  std::ofstream toml(dir / "demo.toml", std::ios::binary);
  toml << "seed = " << spec.seed << "\n\n[paths]\nlogs = [";
  for (std::size_t i = 0; i < spec.backbones.size(); ++i) {
    toml << (i ? ", " : "") << "\"logs/" << spec.backbones[i] << ".jsonl\"";
  }
  toml << "]\nreferences = \"references.jsonl\"\nout = \"out\"\n\n"
       << "[split]\ntrain_fraction = 0.1\n\n[learner]\nkind = \"gbdt\"\n\n[quality]\nmetrics = [\"chrf\"]\n";
  if (!toml) throw core::InputError("cannot write " + (dir / "demo.toml").string());
}

}  // namespace promptroute::synth
