#pragma once

// Chat-completion providers: two HTTP wire dialects and a seeded simulator
// behind one interface, with rate limiting and retries.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pibench/benchmark.hpp"
#include "pibench/clock.hpp"
#include "pibench/error.hpp"

namespace pibench {

enum class ProviderKind { openai_dialect, azure_dialect, simulated };

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view text);

/// Absent fields mean "provider default": nothing is sent.
struct SamplingParams {
  std::optional<double> temperature;
  std::optional<std::int64_t> seed;
  std::optional<double> top_p;

  void validate() const;
  friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

struct RetryPolicy {
  int max_attempts = 3;
  Duration base_backoff = std::chrono::seconds(1);
  double multiplier = 2.0;

  /// Wait after failed attempt `attempt` (1-based): base · multiplier^(attempt − 1).
  Duration backoff_after(int attempt) const;
};

/// Which sampling parameters a provider honours. Requested but unsupported
/// parameters are dropped from the request and reported as warnings.
struct Capabilities {
  bool temperature = true;
  bool seed = true;
  bool top_p = true;
};

Capabilities default_capabilities(ProviderKind kind);

struct SimulatedModelSpec {
  double accuracy = 0.85;
  std::map<std::string, double> per_question_accuracy;
  bool deterministic_at_zero = true;
  std::uint64_t master_seed = 0;

  double accuracy_for(const std::string& question_id) const;
  void validate() const;
};

struct ProviderConfig {
  std::string name;
  ProviderKind kind = ProviderKind::simulated;
  std::string endpoint;  ///< base URL; unused for the simulator
  std::string model_id;
  std::optional<std::string> api_version;  ///< azure only
  std::string credentials_env;              ///< name of the variable, never its value
  double rate_limit_per_minute = 60.0;
  int max_concurrency = 4;
  RetryPolicy retry;
  Duration timeout = std::chrono::seconds(60);
  Capabilities capabilities;
  SimulatedModelSpec simulated;

  void validate() const;
};

/// One chat completion request. `question_id` and `repeat_index` give keyed
/// providers (the simulator) their context; HTTP providers ignore them.
struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  SamplingParams params;
  std::string question_id;
  std::size_t repeat_index = 0;
};

struct ChatExchange {
  std::string system_prompt;
  std::string user_prompt;
  SamplingParams params;
  std::optional<std::string> response_text;  ///< present iff the exchange succeeded
  Duration latency{0};
  int attempt_count = 1;
  std::map<std::string, std::string> provider_echo;
};

enum class ProviderErrorKind { rate_limited, transient, auth, malformed, exhausted };

std::string_view to_string(ProviderErrorKind kind);

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what, int attempts = 1)
      : Error(what), kind_(kind), attempts_(attempts) {}

  ProviderErrorKind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept {
    return kind_ == ProviderErrorKind::rate_limited || kind_ == ProviderErrorKind::transient;
  }

 private:
  ProviderErrorKind kind_;
  int attempts_;
};

/// Names of requested parameters the provider cannot honour.
std::vector<std::string> unsupported_params(const ProviderConfig& config,
                                            const SamplingParams& params);

// ---------------------------------------------------------------------------
// Rate limiting

/// Token bucket of capacity R refilled at R per minute, in its GCRA form:
/// exact integer arithmetic on a theoretical arrival time.
class RateLimiter {
 public:
  struct Decision {
    bool granted = false;
    Duration wait{0};  ///< how long until a permit is available, when not granted
  };

  explicit RateLimiter(double requests_per_minute);

  Decision try_acquire(Duration now);
  /// Blocks (via the clock) until a permit is granted.
  void acquire(Clock& clock);

  Duration emission_interval() const noexcept { return interval_; }
  std::int64_t capacity() const noexcept { return capacity_; }

 private:
  std::mutex mutex_;
  Duration interval_;
  Duration tolerance_;
  std::int64_t capacity_;
  std::optional<Duration> tat_;
};

/// Counting gate for max_concurrency in-flight requests.
class ConcurrencyGate {
 public:
  explicit ConcurrencyGate(int slots) : free_(slots) {}
  void acquire();
  void release();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int free_;
};

// ---------------------------------------------------------------------------
// Wire formats

struct HttpRequest {
  std::string base_url;         ///< scheme://host[:port]
  std::string path_and_query;   ///< /openai/deployments/...?api-version=...
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct ParsedReply {
  std::string text;
  std::map<std::string, std::string> echo;
};

/// Splits "https://host:8443/v1" into ("https://host:8443", "/v1").
std::pair<std::string, std::string> split_url(const std::string& url);

namespace openai_wire {
/// POST {endpoint}/chat/completions with bearer auth.
HttpRequest build_request(const ProviderConfig& config, const ChatRequest& request,
                          const std::string& api_key);
ParsedReply parse_response(std::string_view body);
}  // namespace openai_wire

namespace azure_wire {
/// POST {endpoint}/openai/deployments/{model}/chat/completions?api-version=... with api-key header.
HttpRequest build_request(const ProviderConfig& config, const ChatRequest& request,
                          const std::string& api_key);
ParsedReply parse_response(std::string_view body);
}  // namespace azure_wire

/// Maps an HTTP status to an error kind; nullopt for 2xx.
std::optional<ProviderErrorKind> classify_status(int status);

// ---------------------------------------------------------------------------
// Providers

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws ProviderError(transient) on connection failure or timeout.
  virtual HttpResponse post(const HttpRequest& request, Duration timeout) = 0;
};

/// cpp-httplib backed transport. https endpoints need OpenSSL support at build time.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request, Duration timeout) override;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatExchange complete(const ChatRequest& request) = 0;
  virtual const ProviderConfig& config() const = 0;
};

class HttpChatProvider final : public ChatProvider {
 public:
  /// Resolves the API key from config.credentials_env; throws
  /// ProviderError(auth) when the variable is unset.
  HttpChatProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                   std::shared_ptr<Clock> clock);

  ChatExchange complete(const ChatRequest& request) override;
  const ProviderConfig& config() const override { return config_; }

 private:
  ProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  std::string api_key_;
  RateLimiter limiter_;
  ConcurrencyGate gate_;
};

/// One simulated completion. Correctness is a pure function of the key:
/// (master_seed, params.seed, question id) when temperature is 0, a seed is
/// set and deterministic_at_zero holds; otherwise (master_seed, question id,
/// repeat_index).
ChatExchange simulate_complete(const SimulatedModelSpec& spec, const Question& question,
                               const std::set<Direction>& vocabulary,
                               const SamplingParams& params, std::size_t repeat_index);

class SimulatedChatProvider final : public ChatProvider {
 public:
  SimulatedChatProvider(ProviderConfig config, std::shared_ptr<const Benchmark> benchmark);

  ChatExchange complete(const ChatRequest& request) override;
  const ProviderConfig& config() const override { return config_; }

 private:
  ProviderConfig config_;
  std::shared_ptr<const Benchmark> benchmark_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Builds the provider matching config.kind.
std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config,
                                            std::shared_ptr<const Benchmark> benchmark,
                                            std::shared_ptr<Clock> clock);

}  // namespace pibench
