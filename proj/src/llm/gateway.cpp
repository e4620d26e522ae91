#include "conquer/llm/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <set>
#include <thread>
#include <unordered_map>

#include "conquer/error.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer::llm {
namespace {

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Model ids such as "models/gemini-2.0-flash" must not create nested dirs.
std::string model_dir_name(std::string_view model) {
  std::string out;
  for (char c : model) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_model";
  return out;
}

nlohmann::json request_identity(const ChatRequest& req) {
  nlohmann::json j{{"model", req.model},
                   {"system_prompt", req.system_prompt ? nlohmann::json(*req.system_prompt) : nlohmann::json(nullptr)},
                   {"user_prompt", req.user_prompt},
                   {"temperature", req.temperature}};
  if (req.sample != 0) j["sample"] = req.sample;
  return j;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string cache_key(const ChatRequest& req) {
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return sha256_hex(request_identity(req).dump());
}

std::string embedding_cache_key(std::string_view model, std::string_view text) {
  return sha256_hex(nlohmann::json{{"kind", "embedding"}, {"model", model}, {"text", text}}.dump());
}

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ResponseCache::path_for(std::string_view model, std::string_view digest) const {
  return root_ / model_dir_name(model) / std::string(digest.substr(0, 2)) / (std::string(digest) + ".json");
}

std::optional<nlohmann::json> ResponseCache::load(std::string_view model, std::string_view digest) const {
  auto path = path_for(model, digest);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const std::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss and overwrite
  }
}

void ResponseCache::store(std::string_view model, std::string_view digest, const nlohmann::json& record) const {
  write_file(path_for(model, digest), record.dump(2) + "\n");
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, std::max(0, attempt - 2));
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

RateLimiter::RateLimiter(double requests_per_minute)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (rate_per_sec_ <= 0) return;
  for (;;) {
    std::chrono::duration<double> wait{0};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto now = std::chrono::steady_clock::now();
      tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_per_sec_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_);
    }
    std::this_thread::sleep_for(wait);
  }
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      retry_(options.retry),
      limiter_(options.requests_per_minute),
      sleep_(options.sleep ? std::move(options.sleep)
                           : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (options.cache_dir) cache_.emplace(*options.cache_dir);
  if (retry_.max_attempts < 1) retry_.max_attempts = 1;
}

template <typename F>
auto Gateway::with_retries(F&& call) -> decltype(call(1)) {
  for (int attempt = 1;; ++attempt) {
    if (attempt > 1) sleep_(retry_.delay_before(attempt));
    limiter_.acquire();
    attempts_.fetch_add(1);
    try {
      return call(attempt);
    } catch (const TransportError& e) {
      if (!e.retryable()) throw Error(Errc::ProviderRejected, backend_->name() + ": " + e.what());
      if (attempt >= retry_.max_attempts)
        throw Error(Errc::ProviderUnreachable,
                    backend_->name() + ": giving up after " + std::to_string(attempt) + " attempts: " + e.what());
    }
  }
}

std::vector<std::unique_lock<std::mutex>> Gateway::lock_keys(const std::vector<std::string>& keys) {
  std::set<std::size_t> idx;
  if (cache_)
    for (const auto& k : keys) idx.insert(std::hash<std::string>{}(k) % kStripes);
  std::vector<std::unique_lock<std::mutex>> held;
  for (auto i : idx) held.emplace_back(stripes_[i]);
  return held;
}

ChatResponse Gateway::chat(const ChatRequest& req) {
  if (req.user_prompt.empty()) throw Error(Errc::InvalidValue, "chat request has an empty user prompt");
  const std::string key = cache_key(req);
  const auto held = lock_keys({key});
  if (cache_) {
    if (auto rec = cache_->load(req.model, key); rec && rec->contains("response") && (*rec)["response"].is_string()) {
      hits_.fetch_add(1);
      return ChatResponse{(*rec)["response"].get<std::string>(), req.model, true, 0};
    }
  }
  misses_.fetch_add(1);

  int used = 0;
  std::string text = with_retries([&](int attempt) {
    used = attempt;
    return backend_->complete(req);
  });
  if (text::trim(text).empty()) throw Error(Errc::EmptyCompletion, backend_->name() + " returned an empty completion");

  if (cache_) {
    cache_->store(req.model, key,
                  nlohmann::json{{"request", request_identity(req)}, {"response", text}, {"timestamp", utc_timestamp()}});
  }
  return ChatResponse{std::move(text), req.model, false, used};
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts, const std::string& model) {
  if (texts.empty()) throw Error(Errc::InvalidValue, "embed called with no texts");
  for (const auto& t : texts)
    if (t.empty()) throw Error(Errc::InvalidValue, "embed called with an empty text");

  std::vector<std::string> keys;
  for (const auto& t : texts) keys.push_back(embedding_cache_key(model, t));
  const auto held = lock_keys(keys);

  std::vector<std::optional<std::vector<double>>> found(texts.size());
  std::vector<std::string> pending;  // unique texts not in cache, first-seen order
  std::unordered_map<std::string, std::size_t> pending_index;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (pending_index.count(texts[i])) continue;
    if (cache_) {
      auto rec = cache_->load(model, embedding_cache_key(model, texts[i]));
      if (rec && rec->contains("embedding") && (*rec)["embedding"].is_array()) {
        found[i] = (*rec)["embedding"].get<std::vector<double>>();
        hits_.fetch_add(1);
        continue;
      }
    }
    misses_.fetch_add(1);
    pending_index.emplace(texts[i], pending.size());
    pending.push_back(texts[i]);
  }

  std::vector<std::vector<double>> fresh(pending.size());
  const std::size_t batch = std::max<std::size_t>(1, backend_->max_embedding_batch());
  for (std::size_t start = 0; start < pending.size(); start += batch) {
    std::vector<std::string> slice(pending.begin() + static_cast<std::ptrdiff_t>(start),
                                   pending.begin() + static_cast<std::ptrdiff_t>(std::min(pending.size(), start + batch)));
    auto vectors = with_retries([&](int) { return backend_->embed(slice, model); });
    if (vectors.size() != slice.size())
      throw Error(Errc::DimensionMismatch, backend_->name() + " returned " + std::to_string(vectors.size()) +
                                               " embeddings for " + std::to_string(slice.size()) + " inputs");
    for (std::size_t k = 0; k < slice.size(); ++k) {
      if (std::all_of(vectors[k].begin(), vectors[k].end(), [](double v) { return v == 0.0; }))
        throw Error(Errc::InvalidValue, backend_->name() + " returned an all-zero embedding");
      if (cache_) {
        cache_->store(model, embedding_cache_key(model, slice[k]),
                      nlohmann::json{{"request", {{"model", model}, {"text", slice[k]}}},
                                     {"embedding", vectors[k]},
                                     {"timestamp", utc_timestamp()}});
      }
      fresh[start + k] = std::move(vectors[k]);
    }
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto values = found[i] ? std::move(*found[i]) : fresh[pending_index.at(texts[i])];
    out.push_back(EmbeddingVector{std::move(values), model});
  }

  // one length per model per run
  std::lock_guard<std::mutex> lock(dims_mu_);
  auto it = std::find_if(dims_.begin(), dims_.end(), [&](const auto& p) { return p.first == model; });
  std::size_t expected = it != dims_.end() ? it->second : out.front().values.size();
  for (const auto& v : out) {
    if (v.values.size() != expected)
      throw Error(Errc::DimensionMismatch, "embedding length " + std::to_string(v.values.size()) + " != " +
                                               std::to_string(expected) + " for model " + model);
  }
  if (it == dims_.end()) dims_.emplace_back(model, expected);
  return out;
}

GatewayStats Gateway::stats() const { return GatewayStats{hits_.load(), misses_.load(), attempts_.load()}; }

}  // namespace conquer::llm
