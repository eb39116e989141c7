#include "pibench/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "pibench/keyed_random.hpp"

namespace pibench {

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::openai_dialect:
      return "openai_dialect";
    case ProviderKind::azure_dialect:
      return "azure_dialect";
    case ProviderKind::simulated:
      return "simulated";
  }
  return "unknown";
}

ProviderKind parse_provider_kind(std::string_view text) {
  if (text == "openai_dialect" || text == "openai") return ProviderKind::openai_dialect;
  if (text == "azure_dialect" || text == "azure") return ProviderKind::azure_dialect;
  if (text == "simulated" || text == "sim") return ProviderKind::simulated;
  throw ValidationError("unknown provider kind '" + std::string(text) + "'");
}

std::string_view to_string(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::rate_limited:
      return "rate_limited";
    case ProviderErrorKind::transient:
      return "transient";
    case ProviderErrorKind::auth:
      return "auth";
    case ProviderErrorKind::malformed:
      return "malformed";
    case ProviderErrorKind::exhausted:
      return "exhausted";
  }
  return "unknown";
}

void SamplingParams::validate() const {
  if (temperature && !(*temperature >= 0.0)) {
    throw ValidationError("temperature must be nonnegative");
  }
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) {
    throw ValidationError("top_p must lie in (0, 1]");
  }
  if (temperature && top_p) {
    throw ValidationError("set either temperature or top_p, not both");
  }
}

Duration RetryPolicy::backoff_after(int attempt) const {
  const double factor = std::pow(multiplier, std::max(0, attempt - 1));
  return std::chrono::duration_cast<Duration>(
      std::chrono::duration<double, std::nano>(static_cast<double>(base_backoff.count()) * factor));
}

Capabilities default_capabilities(ProviderKind) {
  // Both HTTP dialects accept all three; per-provider overrides come from
  // the config file (e.g. a vendor that ignores seed).
  return {};
}

double SimulatedModelSpec::accuracy_for(const std::string& question_id) const {
  const auto it = per_question_accuracy.find(question_id);
  return it == per_question_accuracy.end() ? accuracy : it->second;
}

void SimulatedModelSpec::validate() const {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw ValidationError("simulated accuracy must lie in [0, 1]");
  }
  for (const auto& [id, p] : per_question_accuracy) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("simulated accuracy for '" + id + "' must lie in [0, 1]");
    }
  }
}

void ProviderConfig::validate() const {
  if (!(rate_limit_per_minute > 0.0)) {
    throw ValidationError("provider '" + name + "': rate_limit must be positive");
  }
  if (max_concurrency < 1) {
    throw ValidationError("provider '" + name + "': max_concurrency must be at least 1");
  }
  if (retry.max_attempts < 1) {
    throw ValidationError("provider '" + name + "': max_attempts must be at least 1");
  }
  if (retry.multiplier < 1.0 || retry.base_backoff < Duration::zero()) {
    throw ValidationError("provider '" + name + "': invalid retry backoff");
  }
  if (kind == ProviderKind::simulated) {
    simulated.validate();
    return;
  }
  if (endpoint.empty()) throw ValidationError("provider '" + name + "' has no endpoint");
  if (model_id.empty()) throw ValidationError("provider '" + name + "' has no model id");
  if (credentials_env.empty()) {
    throw ValidationError("provider '" + name + "' has no credentials_env");
  }
  if (kind == ProviderKind::azure_dialect && (!api_version || api_version->empty())) {
    throw ValidationError("provider '" + name + "' (azure) needs api_version");
  }
}

std::vector<std::string> unsupported_params(const ProviderConfig& config,
                                            const SamplingParams& params) {
  std::vector<std::string> out;
  if (params.temperature && !config.capabilities.temperature) out.emplace_back("temperature");
  if (params.seed && !config.capabilities.seed) out.emplace_back("seed");
  if (params.top_p && !config.capabilities.top_p) out.emplace_back("top_p");
  return out;
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute) {
  if (!(requests_per_minute > 0.0)) throw ValidationError("rate limit must be positive");
  interval_ = std::chrono::duration_cast<Duration>(
      std::chrono::duration<double>(60.0 / requests_per_minute));
  capacity_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(requests_per_minute)));
  tolerance_ = interval_ * (capacity_ - 1);
}

RateLimiter::Decision RateLimiter::try_acquire(Duration now) {
  std::lock_guard lock(mutex_);
  const Duration tat = tat_ ? std::max(*tat_, now) : now;
  if (tat - now > tolerance_) {
    return {false, tat - tolerance_ - now};
  }
  tat_ = tat + interval_;
  return {true, Duration::zero()};
}

void RateLimiter::acquire(Clock& clock) {
  for (;;) {
    const auto decision = try_acquire(clock.now());
    if (decision.granted) return;
    clock.sleep_for(decision.wait);
  }
}

void ConcurrencyGate::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void ConcurrencyGate::release() {
  {
    std::lock_guard lock(mutex_);
    ++free_;
  }
  cv_.notify_one();
}

// ---------------------------------------------------------------------------

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ValidationError("endpoint '" + url + "' is not an absolute http(s) URL");
  }
  const auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

std::optional<ProviderErrorKind> classify_status(int status) {
  if (status >= 200 && status < 300) return std::nullopt;
  if (status == 429) return ProviderErrorKind::rate_limited;
  if (status == 401 || status == 403) return ProviderErrorKind::auth;
  if (status == 408 || status >= 500) return ProviderErrorKind::transient;
  return ProviderErrorKind::malformed;
}

namespace {

std::optional<Duration> retry_after(const HttpResponse& response) {
  for (const auto& [key, value] : response.headers) {
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower != "retry-after") continue;
    char* end = nullptr;
    const double seconds = std::strtod(value.c_str(), &end);
    if (end != value.c_str() && seconds >= 0.0) {
      return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(seconds));
    }
  }
  return std::nullopt;
}

}  // namespace

HttpChatProvider::HttpChatProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport,
                                   std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      limiter_(config_.rate_limit_per_minute),
      gate_(config_.max_concurrency) {
  config_.validate();
  if (config_.kind == ProviderKind::simulated) {
    throw ValidationError("HttpChatProvider cannot serve a simulated provider");
  }
  const char* key = std::getenv(config_.credentials_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError(ProviderErrorKind::auth,
                        "environment variable " + config_.credentials_env + " is not set");
  }
  api_key_ = key;
}

ChatExchange HttpChatProvider::complete(const ChatRequest& request) {
  request.params.validate();
  const HttpRequest http = config_.kind == ProviderKind::azure_dialect
                               ? azure_wire::build_request(config_, request, api_key_)
                               : openai_wire::build_request(config_, request, api_key_);

  gate_.acquire();
  struct Release {
    ConcurrencyGate& gate;
    ~Release() { gate.release(); }
  } release{gate_};

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    limiter_.acquire(*clock_);
    const Duration started = clock_->now();
    std::optional<Duration> server_hint;
    try {
      const HttpResponse response = transport_->post(http, config_.timeout);
      const auto failure = classify_status(response.status);
      if (!failure) {
        const ParsedReply reply = config_.kind == ProviderKind::azure_dialect
                                      ? azure_wire::parse_response(response.body)
                                      : openai_wire::parse_response(response.body);
        ChatExchange ex;
        ex.system_prompt = request.system_prompt;
        ex.user_prompt = request.user_prompt;
        ex.params = request.params;
        ex.response_text = reply.text;
        ex.latency = clock_->now() - started;
        ex.attempt_count = attempt;
        ex.provider_echo = reply.echo;
        return ex;
      }
      ProviderError error(*failure,
                          "HTTP " + std::to_string(response.status) + " from " + config_.name,
                          attempt);
      if (!error.retryable()) throw error;
      last_error = error.what();
      server_hint = retry_after(response);
    } catch (const ProviderError& e) {
      if (!e.retryable()) throw ProviderError(e.kind(), e.what(), attempt);
      last_error = e.what();
    }
    if (attempt < config_.retry.max_attempts) {
      Duration wait = config_.retry.backoff_after(attempt);
      if (server_hint) wait = std::max(wait, *server_hint);
      clock_->sleep_for(wait);
    }
  }
  throw ProviderError(ProviderErrorKind::exhausted,
                      "retries exhausted after " + std::to_string(config_.retry.max_attempts) +
                          " attempts: " + last_error,
                      config_.retry.max_attempts);
}

// ---------------------------------------------------------------------------

namespace {

// Stream tags keep the correctness, answer-choice and style draws of one
// key independent of each other.
enum Draw : std::uint64_t { kCorrect = 0, kAnswer = 1, kStyle = 2 };

std::string styled(std::string_view answer, std::uint64_t style) {
  std::string text(answer);
  switch (style) {
    case 1:
      text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
      break;
    case 2:
      text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
      text += '.';
      break;
    default:
      break;
  }
  return text;
}

}  // namespace

ChatExchange simulate_complete(const SimulatedModelSpec& spec, const Question& question,
                               const std::set<Direction>& vocabulary,
                               const SamplingParams& params, std::size_t repeat_index) {
  const bool frozen = spec.deterministic_at_zero && params.temperature &&
                      *params.temperature == 0.0 && params.seed.has_value();
  KeyedStream key(spec.master_seed);
  if (frozen) {
    key.add("frozen").add(static_cast<std::uint64_t>(*params.seed)).add(question.id);
  } else {
    key.add("sampled").add(question.id).add(static_cast<std::uint64_t>(repeat_index));
  }

  const bool correct = key.uniform(kCorrect) < spec.accuracy_for(question.id);
  std::vector<Direction> pool;
  if (correct) {
    pool.assign(question.expected.begin(), question.expected.end());
  } else {
    for (Direction d : vocabulary) {
      if (!question.expected.contains(d)) pool.push_back(d);
    }
  }

  ChatExchange ex;
  ex.system_prompt = "";
  ex.user_prompt = question.prompt;
  ex.params = params;
  ex.attempt_count = 1;
  ex.provider_echo = {{"model", "simulated"}, {"version", "sim-1"}};
  if (pool.empty()) {
    ex.response_text = "I am not sure.";
  } else {
    const Direction answer = pool[key.below(pool.size(), kAnswer)];
    ex.response_text = styled(to_string(answer), key.below(3, kStyle));
  }
  return ex;
}

SimulatedChatProvider::SimulatedChatProvider(ProviderConfig config,
                                             std::shared_ptr<const Benchmark> benchmark)
    : config_(std::move(config)), benchmark_(std::move(benchmark)) {
  config_.validate();
  if (!benchmark_) throw ValidationError("simulated provider needs a benchmark");
  for (std::size_t i = 0; i < benchmark_->questions.size(); ++i) {
    index_.emplace(benchmark_->questions[i].id, i);
  }
}

ChatExchange SimulatedChatProvider::complete(const ChatRequest& request) {
  const auto it = index_.find(request.question_id);
  if (it == index_.end()) {
    throw ProviderError(ProviderErrorKind::malformed,
                        "simulator has no question '" + request.question_id + "'");
  }
  auto ex = simulate_complete(config_.simulated, benchmark_->questions[it->second],
                              benchmark_->vocabulary, request.params, request.repeat_index);
  ex.system_prompt = request.system_prompt;
  ex.user_prompt = request.user_prompt;
  return ex;
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config,
                                            std::shared_ptr<const Benchmark> benchmark,
                                            std::shared_ptr<Clock> clock) {
  if (config.kind == ProviderKind::simulated) {
    return std::make_unique<SimulatedChatProvider>(config, std::move(benchmark));
  }
  return std::make_unique<HttpChatProvider>(config, std::make_shared<HttplibTransport>(),
                                            std::move(clock));
}

}  // namespace pibench
