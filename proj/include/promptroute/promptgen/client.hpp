#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "promptroute/core/types.hpp"
#include "promptroute/promptgen/templates.hpp"

namespace promptroute::promptgen {

struct EndpointConfig {
  std::string base_url;  // e.g. https://host/v1; requests go to <base_url>/chat/completions
  std::string model;
  std::string backbone;  // recorded on every record; defaults to model
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int max_tokens = 2048;
  int timeout_seconds = 120;
  int max_retries = 3;
  int backoff_initial_ms = 1000;
  int backoff_max_ms = 30000;
  unsigned parallelism = 4;
  nlohmann::json extra_body = nlohmann::json::object();  // merged into each request

  // Throws ConfigError.
  void validate() const;
  const std::string& backbone_name() const { return backbone.empty() ? model : backbone; }
};

// [endpoint] table of a TOML file. Throws ConfigError.
EndpointConfig load_endpoint_config(const std::filesystem::path& path);
EndpointConfig endpoint_config_from_toml(std::string_view toml_text, const std::string& source);

enum class FailureClass { none, retryable, fatal };

struct Completion {
  std::optional<std::string> text;
  FailureClass failure = FailureClass::none;
  std::string error;  // last error when text is empty
  int attempts = 0;
};

// Transport errors, timeouts, 408, 429 and 5xx are retried; other non-2xx
// statuses are fatal.
FailureClass classify_status(int status);

// OpenAI-compatible chat completions. Safe to share across threads: every
// call opens its own connection.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config);
  Completion complete(const std::string& prompt) const;
  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // <prefix>/chat/completions
  std::string api_key_;
};

struct GenerationStats {
  std::size_t records = 0;
  std::size_t failed = 0;
  std::size_t route_native = 0;
  std::size_t route_translate = 0;
  std::size_t route_unparsed = 0;  // defaulted to native
};

// One record for `strategy`. PROMPT-ROUTING issues the routing prompt first,
// then the NATIVE or TRANSLATE prompt it chose.
core::ResponseRecord generate_record(const Instance& instance, core::Strategy strategy,
                                     const TemplateSet& templates, const ChatClient& client,
                                     GenerationStats* stats = nullptr);

std::pair<core::ResponseRecord, core::ResponseRecord> generate_pair(const Instance& instance,
                                                                    const TemplateSet& templates,
                                                                    const ChatClient& client);

struct GenerationResult {
  std::vector<core::ResponseRecord> records;  // instance-major, strategies in the given order
  GenerationStats stats;
};

// Fans out over at most config().parallelism concurrent requests.
GenerationResult generate(std::span<const Instance> instances, std::span<const core::Strategy> strategies,
                          const TemplateSet& templates, const ChatClient& client);

}  // namespace promptroute::promptgen
