#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "promptroute/core/types.hpp"

namespace promptroute::synth {

// Seeded response logs with a planted routing rule: on the `translate_wins`
// languages TRANSLATE answers correctly and NATIVE does not, elsewhere the
// reverse; each strategy's outcome is then flipped independently with
// probability `noise`. The preferred side's reasoning repeats more question
// words, so the rule also shows up in the overlap features.
struct CorpusSpec {
  std::vector<std::string> languages;  // default: the ten evaluated languages
  std::vector<std::string> translate_wins = {"si", "sw", "yo"};
  std::vector<std::string> backbones = {"ds"};
  std::size_t per_language = 200;
  double noise = 0.2;
  std::uint64_t seed = 7;
};

struct Corpus {
  std::vector<core::ResponseRecord> records;  // NATIVE and TRANSLATE per instance and backbone
  // English originals keyed by instance id; the translate responses carry
  // noisy copies, worse on the translate_wins languages.
  std::vector<std::pair<std::string, std::pair<std::string, std::vector<std::string>>>> references;
};

Corpus make_corpus(const CorpusSpec& spec);

// The planted rule as a router: translate iff the language is in translate_wins.
core::Route planted_route(const CorpusSpec& spec, const std::string& language);

// Writes logs/<backbone>.jsonl, references.jsonl and demo.toml under `dir`.
void write_demo(const std::filesystem::path& dir, const CorpusSpec& spec);

}  // namespace promptroute::synth
