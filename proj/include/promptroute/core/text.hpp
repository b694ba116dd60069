#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace promptroute::core {

// NFKC + full case folding (ICU NFKC_Casefold), whitespace runs collapsed to a
// single U+0020, leading/trailing whitespace removed. Idempotent.
std::string normalize_text(std::string_view text);

// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

// Unicode general category P* (Pc Pd Ps Pe Pi Pf Po).
bool is_punctuation(char32_t cp);
// Unicode general category Nd.
bool is_decimal_digit(char32_t cp);
// Unicode White_Space property.
bool is_whitespace(char32_t cp);
// Sentence-terminal marks used by the grammar heuristics (. ! ? and their
// CJK / Devanagari / Arabic counterparts).
bool is_sentence_terminal(char32_t cp);

// Closing brackets and quotes (Pe, Pf, ASCII quotes) that may trail a
// sentence-terminal mark.
bool is_closing_punctuation(char32_t cp);

std::size_t codepoint_length(std::string_view text);

// normalize_text, whitespace split, leading/trailing punctuation stripped from
// each token, empty tokens dropped.
std::vector<std::string> word_tokens(std::string_view text);

// As word_tokens but segments with the ICU word break iterator after
// normalization. Suits scripts written without spaces.
std::vector<std::string> icu_word_tokens(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);
std::string_view trim_ascii(std::string_view s);
std::string to_lower_ascii(std::string_view s);

}  // namespace promptroute::core
