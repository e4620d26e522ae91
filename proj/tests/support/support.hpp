#pragma once

#include <atomic>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "conquer/llm/gateway.hpp"
#include "conquer/llm/mock_backend.hpp"
#include "conquer/pipeline/pipeline.hpp"
#include "conquer/serialization.hpp"

namespace conquer::support {

inline std::filesystem::path source_dir() { return CONQUER_SOURCE_DIR; }
inline std::filesystem::path test_data(const std::string& name) { return source_dir() / "tests" / "data" / name; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "fixtures"; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "conquer-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void no_sleep(std::chrono::milliseconds) {}

inline llm::GatewayOptions fast_options(std::optional<std::filesystem::path> cache = std::nullopt, int attempts = 4) {
  llm::GatewayOptions o;
  o.cache_dir = std::move(cache);
  o.retry.max_attempts = attempts;
  o.sleep = no_sleep;
  return o;
}

/// Backend whose replies come from a script. Each step either returns text
/// or throws a TransportError; once the script runs out, `fallback` answers.
class ScriptedBackend final : public llm::Backend {
 public:
  struct Step {
    std::string text;
    bool fail = false;
    bool retryable = true;
    int status = 500;
  };

  static Step reply(std::string t) { return {std::move(t), false, true, 0}; }
  static Step fail_with(int status, bool retryable) { return {{}, true, retryable, status}; }

  void push(Step s) {
    std::lock_guard<std::mutex> lock(mu_);
    script_.push_back(std::move(s));
  }

  std::function<std::string(const llm::ChatRequest&)> fallback = [](const llm::ChatRequest&) { return "ok"; };
  std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)> embedder =
      [](const std::vector<std::string>& texts) {
        std::vector<std::vector<double>> out;
        for (const auto& t : texts) out.push_back({static_cast<double>(t.size()), 1.0, 0.5});
        return out;
      };

  std::string name() const override { return "scripted"; }

  std::string complete(const llm::ChatRequest& req) override {
    ++calls;
    {
      std::lock_guard<std::mutex> lock(mu_);
      requests.push_back(req);
      if (!script_.empty()) {
        Step s = script_.front();
        script_.pop_front();
        if (s.fail) throw llm::TransportError("scripted http " + std::to_string(s.status), s.retryable, s.status);
        return s.text;
      }
    }
    return fallback(req);
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts, const std::string&) override {
    ++embed_calls;
    return embedder(texts);
  }

  std::atomic<int> calls{0};
  std::atomic<int> embed_calls{0};
  std::vector<llm::ChatRequest> requests;

 private:
  std::mutex mu_;
  std::deque<Step> script_;
};

inline const pipeline::PromptLibrary& prompts() {
  static const pipeline::PromptLibrary lib = pipeline::PromptLibrary::load(source_dir() / "prompts");
  return lib;
}

/// Renders three quiz blocks in the generator's output format.
inline std::string quiz_text(const std::vector<std::pair<std::string, std::vector<std::string>>>& blocks) {
  std::string out;
  for (const auto& [q, opts] : blocks) {
    out += "[Quiz]\nQuiz: " + q + "\n";
    for (std::size_t i = 0; i < opts.size(); ++i) out += std::string(1, static_cast<char>('A' + i)) + ". " + opts[i] + "\n";
    out += "\n";
  }
  return out;
}

inline std::string sample_quiz_text() {
  return quiz_text({{"What do plants need to make food?", {"Sunlight", "Sand", "Salt", "Smoke"}},
                    {"Which gas do plants release?", {"Oxygen", "Helium", "Neon", "Argon"}},
                    {"Where does photosynthesis happen?", {"Leaves", "Roots", "Bark", "Seeds"}}});
}

/// n whitespace-separated distinct tokens "w0 w1 ...".
inline std::string numbered_words(std::size_t n, const std::string& prefix = "w") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + prefix + std::to_string(i);
  return out;
}

}  // namespace conquer::support
