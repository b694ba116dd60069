#include "promptroute/core/text.hpp"

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <memory>
#include <stdexcept>

namespace promptroute::core {

namespace {

const icu::Normalizer2& nfkc_casefold() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error(std::string("ICU NFKC_Casefold unavailable: ") + u_errorName(status));
  }
  return *n;
}

std::u32string strip_punct_edges(std::u32string_view token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && is_punctuation(token[b])) ++b;
  while (e > b && is_punctuation(token[e - 1])) --e;
  return std::u32string(token.substr(b, e - b));
}

}  // namespace

std::string normalize_text(std::string_view text) {
  if (text.empty()) return {};
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString folded = nfkc_casefold().normalize(src, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("ICU normalization failed: ") + u_errorName(status));
  }
  std::string utf8;
  folded.toUTF8String(utf8);

  const std::u32string cps = decode_utf8(utf8);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return encode_utf8(out);
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
    if (error) {
      n = 0;
      U8_APPEND_UNSAFE(buf, n, 0xFFFD);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

bool is_punctuation(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)) != 0; }

bool is_decimal_digit(char32_t cp) {
  return u_charType(static_cast<UChar32>(cp)) == U_DECIMAL_DIGIT_NUMBER;
}

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

bool is_sentence_terminal(char32_t cp) {
  switch (cp) {
    case U'.':
    case U'!':
    case U'?':
    case U'。':  // ideographic full stop
    case U'！':  // fullwidth !
    case U'？':  // fullwidth ?
    case U'．':  // fullwidth .
    case U'।':  // devanagari danda
    case U'॥':  // double danda
    case U'؟':  // arabic question mark
    case U'۔':  // arabic full stop
    case U'෴':  // sinhala kunddaliya
    case U'…':  // ellipsis
      return true;
    default:
      return false;
  }
}

bool is_closing_punctuation(char32_t cp) {
  if (cp == U'"' || cp == U'\'') return true;
  const auto type = u_charType(static_cast<UChar32>(cp));
  return type == U_END_PUNCTUATION || type == U_FINAL_PUNCTUATION;
}

std::size_t codepoint_length(std::string_view text) { return decode_utf8(text).size(); }

std::vector<std::string> word_tokens(std::string_view text) {
  const std::u32string norm = decode_utf8(normalize_text(text));
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= norm.size(); ++i) {
    if (i == norm.size() || norm[i] == U' ') {
      if (i > start) {
        std::u32string tok =
            strip_punct_edges(std::u32string_view(norm).substr(start, i - start));
        if (!tok.empty()) out.push_back(encode_utf8(tok));
      }
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> icu_word_tokens(std::string_view text) {
  const std::string norm = normalize_text(text);
  const icu::UnicodeString u = icu::UnicodeString::fromUTF8(norm);
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("ICU word iterator unavailable: ") + u_errorName(status));
  }
  it->setText(u);
  std::vector<std::string> out;
  int32_t start = it->first();
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
    std::string piece;
    u.tempSubStringBetween(start, end).toUTF8String(piece);
    std::u32string tok = strip_punct_edges(decode_utf8(piece));
    bool blank = true;
    for (char32_t cp : tok) {
      if (!is_whitespace(cp)) blank = false;
    }
    if (!tok.empty() && !blank) out.push_back(encode_utf8(tok));
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::string_view trim_ascii(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace promptroute::core
