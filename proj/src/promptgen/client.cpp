#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "promptroute/core/parallel.hpp"
#include "promptroute/promptgen/client.hpp"

namespace promptroute::promptgen {

namespace {

// Splits "scheme://host[:port]/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw core::ConfigError("endpoint base_url needs a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw core::ConfigError("unsupported scheme in " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {origin, prefix};
}

nlohmann::json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    auto obj = nlohmann::json::object();
    for (const auto& [k, v] : *t) obj[std::string(k.str())] = toml_to_json(v);
    return obj;
  }
  if (const auto* a = node.as_array()) {
    auto arr = nlohmann::json::array();
    for (const auto& v : *a) arr.push_back(toml_to_json(v));
    return arr;
  }
  if (const auto v = node.value_exact<std::string>()) return *v;
  if (const auto v = node.value_exact<bool>()) return *v;
  if (const auto v = node.value_exact<std::int64_t>()) return *v;
  if (const auto v = node.value_exact<double>()) return *v;
  throw core::ConfigError("unsupported value type in extra_body");
}

core::ResponseRecord base_record(const Instance& inst, core::Strategy strategy, const std::string& backbone) {
  core::ResponseRecord r;
  r.id = inst.id;
  r.dataset = inst.dataset;
  r.language = inst.language;
  r.subject = inst.subject;
  r.strategy = strategy;
  r.backbone = backbone;
  r.question = inst.question;
  r.options = inst.options;
  r.context = inst.context;
  r.gold = inst.gold;
  return r;
}

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.empty()) throw core::ConfigError("endpoint.base_url is required");
  split_url(base_url);
  if (model.empty()) throw core::ConfigError("endpoint.model is required");
  if (parallelism < 1) throw core::ConfigError("endpoint.parallelism must be >= 1");
  if (max_retries < 0) throw core::ConfigError("endpoint.max_retries must be >= 0");
  if (timeout_seconds < 1) throw core::ConfigError("endpoint.timeout_seconds must be >= 1");
  if (max_tokens < 1) throw core::ConfigError("endpoint.max_tokens must be >= 1");
  if (backoff_initial_ms < 0 || backoff_max_ms < backoff_initial_ms) {
    throw core::ConfigError("endpoint backoff must satisfy 0 <= backoff_initial_ms <= backoff_max_ms");
  }
  if (!std::isfinite(temperature) || temperature < 0) throw core::ConfigError("endpoint.temperature must be >= 0");
  if (!extra_body.is_object()) throw core::ConfigError("endpoint.extra_body must be a table");
}

EndpointConfig endpoint_config_from_toml(std::string_view toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    throw core::ConfigError(source + ": " + std::string(e.description()));
  }
  const auto* ep = root["endpoint"].as_table();
  if (!ep) throw core::ConfigError(source + ": missing [endpoint] table");
  EndpointConfig c;
  const toml::table& t = *ep;
  c.base_url = t["base_url"].value_or(c.base_url);
  c.model = t["model"].value_or(c.model);
  c.backbone = t["backbone"].value_or(c.backbone);
  c.api_key_env = t["api_key_env"].value_or(c.api_key_env);
  c.temperature = t["temperature"].value_or(c.temperature);
  c.max_tokens = t["max_tokens"].value_or(c.max_tokens);
  c.timeout_seconds = t["timeout_seconds"].value_or(c.timeout_seconds);
  c.max_retries = t["max_retries"].value_or(c.max_retries);
  c.backoff_initial_ms = t["backoff_initial_ms"].value_or(c.backoff_initial_ms);
  c.backoff_max_ms = t["backoff_max_ms"].value_or(c.backoff_max_ms);
  const std::int64_t par = t["parallelism"].value_or(static_cast<std::int64_t>(c.parallelism));
  if (par < 1) throw core::ConfigError(source + ": endpoint.parallelism must be >= 1");
  c.parallelism = static_cast<unsigned>(par);
  if (const auto* extra = t["extra_body"].as_table()) c.extra_body = toml_to_json(*extra);
  for (const auto& [k, v] : t) {
    static const std::set<std::string_view> known{"base_url",        "model",          "backbone",
                                                  "api_key_env",     "temperature",    "max_tokens",
                                                  "timeout_seconds", "max_retries",    "backoff_initial_ms",
                                                  "backoff_max_ms",  "parallelism",    "extra_body"};
    if (!known.count(k.str())) throw core::ConfigError(source + ": unknown key endpoint." + std::string(k.str()));
  }
  c.validate();
  return c;
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return endpoint_config_from_toml(ss.str(), path.string());
}

FailureClass classify_status(int status) {
  if (status >= 200 && status < 300) return FailureClass::none;
  if (status == 408 || status == 429 || status >= 500) return FailureClass::retryable;
  return FailureClass::fatal;
}

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  auto [origin, prefix] = split_url(config_.base_url);
  origin_ = std::move(origin);
  path_ = prefix + "/chat/completions";
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

Completion ChatClient::complete(const std::string& prompt) const {
  nlohmann::json body = config_.extra_body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  Completion out;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double wait = std::min<double>(config_.backoff_max_ms,
                                           config_.backoff_initial_ms * std::ldexp(1.0, attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(wait)));
    }
    ++out.attempts;
    httplib::Client cli(origin_);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      out.failure = FailureClass::retryable;
      out.error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    out.failure = classify_status(res->status);
    if (out.failure != FailureClass::none) {
      out.error = "HTTP " + std::to_string(res->status);
      if (out.failure == FailureClass::fatal) return out;
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      out.text = content.is_null() ? std::string() : content.get<std::string>();
      out.failure = FailureClass::none;
      out.error.clear();
      return out;
    } catch (const nlohmann::json::exception& e) {
      // truncated bodies from proxies are worth another attempt
      out.failure = FailureClass::retryable;
      out.error = std::string("malformed completion: ") + e.what();
    }
  }
  return out;
}

core::ResponseRecord generate_record(const Instance& instance, core::Strategy strategy,
                                     const TemplateSet& templates, const ChatClient& client,
                                     GenerationStats* stats) {
  auto record = base_record(instance, strategy, client.config().backbone_name());
  core::Strategy answer_strategy = strategy;
  if (strategy == core::Strategy::prompt_routing) {
    const auto routing = client.complete(render(templates, strategy, instance));
    if (!routing.text) {
      record.generation_failed = true;
      return record;
    }
    const auto decision = parse_route_decision(*routing.text);
    record.route_decision = decision.value_or(core::Route::native);
    if (stats) {
      if (!decision) ++stats->route_unparsed;
      ++(record.route_decision == core::Route::native ? stats->route_native : stats->route_translate);
    }
    answer_strategy = *record.route_decision == core::Route::native ? core::Strategy::native
                                                                    : core::Strategy::translate;
  }
  const auto answer = client.complete(render(templates, answer_strategy, instance));
  if (answer.text) {
    record.response_text = *answer.text;
  } else {
    record.generation_failed = true;
  }
  return record;
}

std::pair<core::ResponseRecord, core::ResponseRecord> generate_pair(const Instance& instance,
                                                                    const TemplateSet& templates,
                                                                    const ChatClient& client) {
  const core::Strategy both[] = {core::Strategy::native, core::Strategy::translate};
  auto result = generate(std::span<const Instance>(&instance, 1), both, templates, client);
  return {std::move(result.records[0]), std::move(result.records[1])};
}

GenerationResult generate(std::span<const Instance> instances, std::span<const core::Strategy> strategies,
                          const TemplateSet& templates, const ChatClient& client) {
  templates.require(strategies, instances);
  for (const auto& inst : instances) templates.language_name(inst.language);
  const std::size_t n = instances.size() * strategies.size();
  GenerationResult result;
  result.records.resize(n);
  std::vector<GenerationStats> per_task(n);
  core::parallel_for(
      n,
      [&](std::size_t i) {
        const auto& inst = instances[i / strategies.size()];
        result.records[i] = generate_record(inst, strategies[i % strategies.size()], templates, client, &per_task[i]);
      },
      client.config().parallelism);
  for (std::size_t i = 0; i < n; ++i) {
    ++result.stats.records;
    if (result.records[i].generation_failed) ++result.stats.failed;
    result.stats.route_native += per_task[i].route_native;
    result.stats.route_translate += per_task[i].route_translate;
    result.stats.route_unparsed += per_task[i].route_unparsed;
  }
  return result;
}

}  // namespace promptroute::promptgen
