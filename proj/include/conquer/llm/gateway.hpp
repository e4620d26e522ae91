#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace conquer::llm {

struct ChatRequest {
  std::string model;
  std::optional<std::string> system_prompt;
  std::string user_prompt;
  double temperature = 0.7;
  int max_output_tokens = 1024;
  /// Distinguishes deliberate re-asks (parse retries) of an otherwise
  /// identical request. 0 is the first ask and leaves the cache key as the
  /// plain (model, system_prompt, user_prompt, temperature) digest.
  int sample = 0;
};

struct ChatResponse {
  std::string text;
  std::string provider_model;
  bool cached = false;
  /// Provider round-trips spent on this response (0 when cached).
  int attempts = 0;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model;

  bool operator==(const EmbeddingVector&) const = default;
};

std::string sha256_hex(std::string_view data);

/// Content digest over the canonical JSON of the request's identity fields.
std::string cache_key(const ChatRequest& req);
std::string embedding_cache_key(std::string_view model, std::string_view text);

/// Thrown by backends for transport-level failures. `retryable` covers
/// connection failures, 408, 429 and 5xx.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, bool retryable, int status = 0)
      : std::runtime_error(what), retryable_(retryable), status_(status) {}
  bool retryable() const noexcept { return retryable_; }
  int status() const noexcept { return status_; }

 private:
  bool retryable_;
  int status_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// Returns the completion text or throws TransportError.
  virtual std::string complete(const ChatRequest& req) = 0;
  /// One vector per input, same order. Throws TransportError.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts, const std::string& model) = 0;
  virtual std::size_t max_embedding_batch() const { return 64; }
};

/// On-disk response store: <root>/<model>/<first-2-hex>/<digest>.json.
/// Writes go through a temp file and rename, so concurrent writers of the
/// same key leave one complete record (values are identical by construction).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  std::optional<nlohmann::json> load(std::string_view model, std::string_view digest) const;
  void store(std::string_view model, std::string_view digest, const nlohmann::json& record) const;
  std::filesystem::path path_for(std::string_view model, std::string_view digest) const;

 private:
  std::filesystem::path root_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 2
};

/// Token bucket over requests per minute; 0 disables it.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute);
  void acquire();

 private:
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

struct GatewayStats {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t provider_attempts = 0;

  double hit_rate() const {
    auto total = cache_hits + cache_misses;
    return total == 0 ? 0.0 : static_cast<double>(cache_hits) / static_cast<double>(total);
  }
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  double requests_per_minute = 0.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// Uniform chat/embedding entry point: cache lookup, rate limiting and
/// retry with exponential backoff around a Backend. Safe for concurrent use.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options);

  /// Errors: ProviderUnreachable (retries exhausted), ProviderRejected,
  /// EmptyCompletion.
  ChatResponse chat(const ChatRequest& req);

  /// Errors: ProviderUnreachable, ProviderRejected, DimensionMismatch.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts, const std::string& model);

  GatewayStats stats() const;
  const Backend& backend() const { return *backend_; }

 private:
  template <typename F>
  auto with_retries(F&& call) -> decltype(call(1));

  // Identical requests in flight at once share one provider call: the key's
  // stripe is held from cache lookup to cache store. Stripes are taken in
  // index order, so batch embeds cannot deadlock.
  static constexpr std::size_t kStripes = 256;
  std::vector<std::unique_lock<std::mutex>> lock_keys(const std::vector<std::string>& keys);
  std::array<std::mutex, kStripes> stripes_;

  std::shared_ptr<Backend> backend_;
  std::optional<ResponseCache> cache_;
  RetryPolicy retry_;
  RateLimiter limiter_;
  std::function<void(std::chrono::milliseconds)> sleep_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> attempts_{0};
  mutable std::mutex dims_mu_;
  std::vector<std::pair<std::string, std::size_t>> dims_;  // model -> vector length seen this run
};

}  // namespace conquer::llm
