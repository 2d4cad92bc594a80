#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "json.hpp"

namespace tablesum {

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 512;
};

struct GenerationResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  int attempts = 1;
};

/// Text-generation boundary. Implementations must tolerate concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct BackendConfig {
  std::string endpoint;                    // http(s)://host[:port]/path
  std::string model;
  std::string api_key_env = "LLM_API_KEY";  // empty: send no auth header
  double timeout_seconds = 30.0;
  int max_retries = 2;
  int backoff_base_ms = 250;
  /// Extra body fields passed through untouched (temperature, top_p, ...).
  nlohmann::json extra_params = nlohmann::json::object();

  /// Endpoint and model from LLM_ENDPOINT / LLM_MODEL when set.
  static BackendConfig from_env();
  /// Throws ConfigError on an unusable configuration.
  void validate() const;
};

/// POSTs {model, prompt, max_tokens, ...extra} as JSON with bearer auth.
/// Retries timeouts, connection failures, and 5xx replies with exponential
/// backoff; at most max_retries + 1 attempts. 4xx is never retried.
GenerationResponse generate(const BackendConfig& config, const GenerationRequest& request);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  GenerationResponse generate(const GenerationRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  BackendConfig config_;
};

/// Restates every metric of a canonical prompt (or every row of a flat
/// prompt) as a sentence. Throws EchoError for anything else.
std::string echo_metrics(const std::string& prompt);

/// echo_metrics with exactly one non-zero number scaled by 1.5, the number
/// picked deterministically from `seed`.
std::string corrupt_metrics(const std::string& prompt, std::uint64_t seed);

class EchoBackend : public Backend {
 public:
  GenerationResponse generate(const GenerationRequest& request) override;
  std::string name() const override { return "echo"; }
};

class CorruptingBackend : public Backend {
 public:
  explicit CorruptingBackend(std::uint64_t seed) : seed_(seed) {}
  GenerationResponse generate(const GenerationRequest& request) override;
  std::string name() const override { return "corrupt"; }

 private:
  std::uint64_t seed_;
};

/// Always replies with the same text; the default relevance judge replies "3".
class ConstantBackend : public Backend {
 public:
  explicit ConstantBackend(std::string reply) : reply_(std::move(reply)) {}
  GenerationResponse generate(const GenerationRequest&) override { return {reply_}; }
  std::string name() const override { return "constant"; }

 private:
  std::string reply_;
};

/// Forwards to another backend and counts invocations.
class CountingBackend : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}
  GenerationResponse generate(const GenerationRequest& request) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.generate(request);
  }
  std::string name() const override { return inner_.name(); }
  long calls() const { return calls_.load(); }

 private:
  Backend& inner_;
  std::atomic<long> calls_{0};
};

}  // namespace tablesum
