#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace promptroute::core {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Annotation key: sha256_hex(normalize_text(text)).
std::string text_key(std::string_view text);

}  // namespace promptroute::core
