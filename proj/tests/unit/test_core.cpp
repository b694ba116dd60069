#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "promptroute/core/errors.hpp"
#include "promptroute/core/hash.hpp"
#include "promptroute/core/jsonl.hpp"
#include "promptroute/core/resource.hpp"
#include "promptroute/core/rng.hpp"
#include "promptroute/core/text.hpp"
#include "promptroute/core/validate.hpp"
#include "support/records.hpp"

using namespace promptroute;
using namespace promptroute::core;
using promptroute::testing::mc_record;
using promptroute::testing::with_correct;

namespace {

// Code points that exercise compatibility mappings, case folding, combining
// sequences and exotic whitespace.
std::u32string random_unicode(Rng& rng) {
  static const std::vector<std::pair<char32_t, char32_t>> ranges = {
      {0x20, 0x7e},     {0xa0, 0xff},     {0x300, 0x36f},   {0x391, 0x3c9},  {0x400, 0x44f},
      {0x900, 0x97f},   {0x980, 0x9ff},   {0xd80, 0xdff},   {0x1e00, 0x1eff}, {0x2000, 0x200b},
      {0x2150, 0x218b}, {0x2460, 0x24ff}, {0x3000, 0x303f}, {0x3131, 0x318e}, {0x4e00, 0x4e7f},
      {0xac00, 0xac7f}, {0xfb00, 0xfb06}, {0xff01, 0xff5e}, {0x1d400, 0x1d4ff}};
  static const std::u32string specials = U"\t\n\r ßİıςΣẞǅ­‍İ ﻿";
  std::u32string out;
  const auto len = rng.below(24);
  for (std::uint64_t i = 0; i < len; ++i) {
    if (rng.bernoulli(0.15)) {
      out.push_back(specials[rng.below(specials.size())]);
    } else {
      const auto& [lo, hi] = ranges[rng.below(ranges.size())];
      out.push_back(static_cast<char32_t>(lo + rng.below(hi - lo + 1)));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("normalize_text canonicalizes case and whitespace") {
  CHECK(normalize_text("  The   Cat ") == "the cat");
  CHECK(normalize_text("PARIS") == "paris");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text(" \t\n ") == "");
  CHECK(normalize_text("Straße") == "strasse");
  CHECK(normalize_text("ｆｕｌｌ　ｗｉｄｔｈ") == "full width");
  CHECK(normalize_text("ﬁne") == "fine");
}

TEST_CASE("normalize_text is idempotent on random unicode") {
  Rng rng(20240611);
  for (int i = 0; i < 1000; ++i) {
    const std::string x = encode_utf8(random_unicode(rng));
    const std::string once = normalize_text(x);
    CAPTURE(x);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("unicode categories") {
  CHECK(is_punctuation(U'?'));
  CHECK(is_punctuation(U'。'));
  CHECK_FALSE(is_punctuation(U'+'));  // Sm
  CHECK(is_decimal_digit(U'7'));
  CHECK(is_decimal_digit(U'৭'));
  CHECK_FALSE(is_decimal_digit(U'½'));
  CHECK(codepoint_length("What is 2+2?") == 12);
  CHECK(codepoint_length("日本語") == 3);
}

TEST_CASE("word_tokens strips edge punctuation") {
  CHECK(word_tokens("The cat sat. The cat ran.") ==
        std::vector<std::string>{"the", "cat", "sat", "the", "cat", "ran"});
  CHECK(word_tokens("What is 2+2?") == std::vector<std::string>{"what", "is", "2+2"});
  CHECK(word_tokens("... !!") == std::vector<std::string>{});
  CHECK(word_tokens("state-of-the-art, \"quoted\"") ==
        std::vector<std::string>{"state-of-the-art", "quoted"});
}

TEST_CASE("icu_word_tokens segments unspaced scripts") {
  const auto toks = icu_word_tokens("我喜欢猫。 Hello, World!");
  CHECK(toks.size() >= 3);
  CHECK(std::find(toks.begin(), toks.end(), "hello") != toks.end());
}

TEST_CASE("text_key hashes the normalized text") {
  CHECK(text_key("  Hello  World ") == text_key("hello world"));
  CHECK(text_key("a") != text_key("b"));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(text_key("x").size() == 64);
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.below(13);
    CHECK(x == b.below(13));
    CHECK(x < 13);
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> w = v;
  Rng(3).shuffle(std::span<int>(v));
  Rng(3).shuffle(std::span<int>(w));
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("resource level mapping") {
  const ResourceMap map;
  CHECK(map.lookup("zh").level == ResourceLevel::high);
  CHECK(map.lookup("hi").level == ResourceLevel::high);
  CHECK(map.lookup("ko").level == ResourceLevel::mid);
  CHECK(map.lookup("yo").level == ResourceLevel::low);
  CHECK(evaluated_languages().size() == 10);
  for (const auto& lang : evaluated_languages()) {
    CHECK(map.lookup(lang).level.has_value());
    CHECK_FALSE(map.lookup(lang).unmapped);
    CHECK(map.lookup(lang).level == ResourceMap().lookup(lang).level);
  }
  const auto unknown = map.lookup("fr");
  CHECK(unknown.unmapped);
  CHECK_FALSE(unknown.level.has_value());

  const ResourceMap configured({{"fr", ResourceLevel::high}}, ResourceLevel::low);
  CHECK(configured.lookup("fr").level == ResourceLevel::high);
  CHECK(configured.lookup("xx").level == ResourceLevel::low);
  CHECK(configured.lookup("xx").unmapped);
}

TEST_CASE("validate_log") {
  std::vector<ResponseRecord> log = {
      mc_record("q1", Strategy::native), mc_record("q1", Strategy::translate),
      mc_record("q2", Strategy::native), mc_record("q2", Strategy::translate)};

  SUBCASE("well-formed fixture") { CHECK(validate_log(log).empty()); }

  SUBCASE("duplicate key") {
    log.push_back(mc_record("q2", Strategy::translate));
    const auto issues = validate_log(log);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].id == "q2");
    CHECK(issues[0].field == "id");
  }

  SUBCASE("too few options") {
    log[0].options = {"only"};
    log[0].gold = "A";
    const auto issues = validate_log(log);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].message == "options<2");
    CHECK(issues[0].id == "q1");
  }

  SUBCASE("qa without context") {
    log[0].dataset = Dataset::xquad;
    log[0].options.clear();
    log[0].gold = "Paris";
    const auto issues = validate_log(log);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].field == "context");
  }

  SUBCASE("parsed answer needs correctness") {
    log[1].parsed_answer = "B";
    const auto issues = validate_log(log);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].field == "is_correct");
  }

  SUBCASE("empty id") {
    log[2].id = "";
    CHECK(validate_log(log).size() == 1);
  }
}

TEST_CASE("records surviving validation satisfy the type invariants") {
  Rng rng(99);
  for (int round = 0; round < 200; ++round) {
    std::vector<ResponseRecord> log;
    const auto n = 1 + rng.below(12);
    for (std::uint64_t i = 0; i < n; ++i) {
      ResponseRecord r = mc_record("q" + std::to_string(rng.below(4)),
                                   kAllStrategies[rng.below(2)]);
      r.dataset = kAllDatasets[rng.below(6)];
      r.options.resize(rng.below(5));
      if (rng.bernoulli(0.5)) r.context = rng.bernoulli(0.5) ? "ctx" : "";
      if (rng.bernoulli(0.3)) r.parsed_answer = std::string(1, static_cast<char>('A' + rng.below(5)));
      if (rng.bernoulli(0.5)) r.is_correct = rng.bernoulli(0.5);
      if (rng.bernoulli(0.1)) r.id.clear();
      log.push_back(r);
    }
    const auto issues = validate_log(log);
    std::set<std::string> flagged;
    for (const auto& issue : issues) flagged.insert(issue.id);

    std::set<std::tuple<std::string, Strategy, std::string>> keys;
    for (const auto& r : log) {
      if (flagged.count(r.id)) continue;
      CHECK_FALSE(r.id.empty());
      CHECK(keys.insert({r.id, r.strategy, r.backbone}).second);
      if (task_kind(r) == TaskKind::multiple_choice) {
        CHECK(r.options.size() >= 2);
      } else {
        REQUIRE(r.context.has_value());
        CHECK_FALSE(r.context->empty());
      }
      if (r.parsed_answer) CHECK(r.is_correct.has_value());
    }
  }
}

TEST_CASE("log JSONL round trip and errors") {
  std::vector<ResponseRecord> log = {with_correct(mc_record("q1", Strategy::native), true),
                                     mc_record("q1", Strategy::translate)};
  log[1].context = "some context";
  log[1].route_decision = Route::translate;
  std::stringstream ss;
  write_log(ss, log);
  const auto back = read_log(ss);
  CHECK(back.issues.empty());
  CHECK(back.records == log);

  std::istringstream bad_header("{\"schema\":2}\n");
  CHECK_THROWS_AS(read_log(bad_header), DataError);

  std::istringstream bad_line(
      "{\"schema\":1}\n{\"id\":\"x\",\"dataset\":\"nope\",\"language\":\"de\",\"strategy\":\"native\","
      "\"backbone\":\"b\",\"question\":\"q\",\"gold\":\"A\"}\nnot json\n");
  const auto parsed = read_log(bad_line);
  CHECK(parsed.records.empty());
  REQUIRE(parsed.issues.size() == 2);
  CHECK(parsed.issues[0].field == "dataset");
  CHECK(parsed.issues[0].line == 2);
  CHECK(parsed.issues[1].line == 3);

  std::ifstream missing("/nonexistent/definitely/missing.jsonl");
  CHECK_THROWS_AS(read_log(missing), InputError);
  CHECK_THROWS_AS(read_log(std::filesystem::path("/nonexistent/x.jsonl")), InputError);
}
