#pragma once

#include <chrono>
#include <string>

#include "conquer/llm/gateway.hpp"

namespace conquer::llm {

/// Splits "https://host:port/prefix" into the origin httplib wants and the
/// path prefix that endpoint paths are appended to.
struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // "" or "/v1", never trailing '/'

  static BaseUrl parse(const std::string& url);
};

/// OpenAI-compatible REST backend. The base URL follows the OpenAI SDK
/// convention: "/chat/completions" and "/embeddings" are appended to it
/// (e.g. https://api.openai.com/v1, or a Gemini OpenAI-compatibility base).
class OpenAiBackend final : public Backend {
 public:
  OpenAiBackend(std::string base_url, std::string api_key,
                std::chrono::seconds read_timeout = std::chrono::seconds(120));

  std::string name() const override { return "openai-compatible(" + base_.origin + base_.prefix + ")"; }
  std::string complete(const ChatRequest& req) override;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts, const std::string& model) override;
  std::size_t max_embedding_batch() const override { return 256; }

 private:
  std::string post(const std::string& path, const std::string& body);

  BaseUrl base_;
  std::string api_key_;
  std::chrono::seconds read_timeout_;
};

}  // namespace conquer::llm
