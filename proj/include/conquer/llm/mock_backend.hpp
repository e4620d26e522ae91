#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "conquer/llm/gateway.hpp"

namespace conquer::llm {

/// Offline backend for hermetic runs.
///
/// Chat: recognizes the shipped prompt templates by their fixed header
/// sentences and answers with schema-valid text (concept lists, summaries,
/// `[Quiz]` blocks, judge JSON, numbered question lists). Every answer is a
/// pure function of (seed, prompt, sample), so a fixed seed reproduces a
/// whole run byte for byte.
///
/// The mock judge rewards quiz sets that mention more distinct content terms;
/// the mock generator draws its terms from the reference context when one is
/// given, so grounded variants win comparisons against the baseline.
///
/// Embeddings: hashed bag-of-words over lowercased non-stopword tokens,
/// seeded, L2-normalized. Identical texts map to identical vectors.
class MockBackend final : public Backend {
 public:
  static constexpr std::size_t kDefaultDim = 256;

  explicit MockBackend(std::uint64_t seed, std::size_t embedding_dim = kDefaultDim);

  /// Canned reply for any prompt containing `needle` (first match wins).
  /// With `sample` set, the rule only applies to that re-ask index.
  void add_rule(std::string needle, std::string response, std::optional<int> sample = std::nullopt);

  std::string name() const override { return "mock"; }
  std::string complete(const ChatRequest& req) override;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts, const std::string& model) override;

  std::size_t chat_calls() const { return chat_calls_.load(); }
  std::size_t embed_calls() const { return embed_calls_.load(); }

  /// Exposed for tests: the embedding of one text.
  std::vector<double> embed_one(const std::string& text) const;

 private:
  struct Rule {
    std::string needle;
    std::string response;
    std::optional<int> sample;
  };

  std::uint64_t seed_;
  std::size_t dim_;
  mutable std::mutex rules_mu_;
  std::vector<Rule> rules_;
  std::atomic<std::size_t> chat_calls_{0};
  std::atomic<std::size_t> embed_calls_{0};
};

/// Distinct content terms in a rendered quiz set, ignoring the mock's own
/// template words and distractor vocabulary. Used by the mock judge.
std::size_t mock_richness(const std::string& quiz_set_text);

}  // namespace conquer::llm
