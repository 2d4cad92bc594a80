#include <cstdlib>
#include <regex>
#include <thread>

#include "httplib.h"
#include "tablesum/backend.hpp"
#include "tablesum/errors.hpp"

namespace tablesum {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw ConfigError("endpoint must look like http(s)://host[:port]/path, got '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string extract_text(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return body;
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_object()) return body;
  for (const char* key : {"text", "completion", "output", "response"}) {
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  }
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    if (c.contains("message") && c["message"].contains("content") &&
        c["message"]["content"].is_string()) {
      return c["message"]["content"].get<std::string>();
    }
  }
  if (j.contains("content") && j["content"].is_array() && !j["content"].empty() &&
      j["content"][0].contains("text")) {
    return j["content"][0]["text"].get<std::string>();
  }
  return body;
}

}  // namespace

BackendConfig BackendConfig::from_env() {
  BackendConfig config;
  if (const char* e = std::getenv("LLM_ENDPOINT")) config.endpoint = e;
  if (const char* m = std::getenv("LLM_MODEL")) config.model = m;
  return config;
}

void BackendConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("no LLM endpoint configured (LLM_ENDPOINT)");
  parse_url(endpoint);
  if (!(timeout_seconds > 0)) throw ConfigError("timeout must be positive");
  if (max_retries < 0) throw ConfigError("max retries must be >= 0");
  if (backoff_base_ms < 0) throw ConfigError("backoff must be >= 0");
  if (!extra_params.is_object()) throw ConfigError("extra parameters must be a JSON object");
}

GenerationResponse generate(const BackendConfig& config, const GenerationRequest& request) {
  config.validate();
  if (request.prompt.empty()) throw ConfigError("prompt must not be empty");

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr) {
      throw ConfigError("auth variable " + config.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json body = config.extra_params;
  body["model"] = config.model;
  body["prompt"] = request.prompt;
  body["max_tokens"] = request.max_tokens;
  const std::string payload = body.dump();

  const auto url = parse_url(config.endpoint);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config.timeout_seconds));
  const auto sec = static_cast<time_t>(timeout.count() / 1'000'000);
  const auto usec = static_cast<time_t>(timeout.count() % 1'000'000);

  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  const int max_attempts = config.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      const long delay = static_cast<long>(config.backoff_base_ms) << (attempt - 2);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    // One client per attempt: no mutable state is shared between callers.
    httplib::Client client(url.origin);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400 || res->status < 200 || res->status >= 300) {
      throw RequestError("endpoint rejected request: HTTP " + std::to_string(res->status) +
                             " " + res->body,
                         res->status, attempt);
    }
    std::string text = extract_text(res->body);
    if (text.empty()) {
      throw RequestError("endpoint returned an empty completion", res->status, attempt);
    }
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return {std::move(text), latency, attempt};
  }
  throw BackendUnavailable("backend unavailable after " + std::to_string(max_attempts) +
                               " attempts: " + last_error,
                           max_attempts);
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
}

GenerationResponse HttpBackend::generate(const GenerationRequest& request) {
  return tablesum::generate(config_, request);
}

}  // namespace tablesum
