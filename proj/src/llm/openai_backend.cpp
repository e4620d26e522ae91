#include "conquer/llm/openai_backend.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <json.hpp>

#include "conquer/error.hpp"

namespace conquer::llm {
namespace {

bool is_retryable_status(int status) { return status == 408 || status == 409 || status == 429 || status >= 500; }

}  // namespace

BaseUrl BaseUrl::parse(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::ConfigError, "base URL needs a scheme: '" + url + "'");
  auto path_start = url.find('/', scheme_end + 3);
  BaseUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

OpenAiBackend::OpenAiBackend(std::string base_url, std::string api_key, std::chrono::seconds read_timeout)
    : base_(BaseUrl::parse(base_url)), api_key_(std::move(api_key)), read_timeout_(read_timeout) {}

std::string OpenAiBackend::post(const std::string& path, const std::string& body) {
  httplib::Client cli(base_.origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(static_cast<time_t>(read_timeout_.count()));
  cli.set_write_timeout(30);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = cli.Post(base_.prefix + path, headers, body, "application/json");
  if (!res) throw TransportError(path + ": " + httplib::to_string(res.error()), true);
  if (res->status < 200 || res->status >= 300) {
    std::string snippet = res->body.substr(0, 300);
    throw TransportError(path + ": http " + std::to_string(res->status) + ": " + snippet,
                         is_retryable_status(res->status), res->status);
  }
  return res->body;
}

std::string OpenAiBackend::complete(const ChatRequest& req) {
  nlohmann::json body;
  body["model"] = req.model;
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_output_tokens;
  body["messages"] = nlohmann::json::array();
  if (req.system_prompt) body["messages"].push_back({{"role", "system"}, {"content", *req.system_prompt}});
  body["messages"].push_back({{"role", "user"}, {"content", req.user_prompt}});

  auto jr = nlohmann::json::parse(post("/chat/completions", body.dump()), nullptr, false);
  if (jr.is_discarded() || !jr.contains("choices") || !jr["choices"].is_array() || jr["choices"].empty())
    throw TransportError("/chat/completions: malformed response body", false);
  const auto& msg = jr["choices"][0].value("message", nlohmann::json::object());
  if (!msg.contains("content") || !msg["content"].is_string()) return {};
  return msg["content"].get<std::string>();
}

std::vector<std::vector<double>> OpenAiBackend::embed(const std::vector<std::string>& texts, const std::string& model) {
  nlohmann::json body{{"model", model}, {"input", texts}};
  auto jr = nlohmann::json::parse(post("/embeddings", body.dump()), nullptr, false);
  if (jr.is_discarded() || !jr.contains("data") || !jr["data"].is_array())
    throw TransportError("/embeddings: malformed response body", false);

  std::vector<std::vector<double>> out(texts.size());
  std::size_t filled = 0;
  for (const auto& item : jr["data"]) {
    std::size_t idx = item.value("index", filled);
    if (idx >= out.size() || !item.contains("embedding") || !item["embedding"].is_array())
      throw TransportError("/embeddings: malformed data item", false);
    out[idx] = item["embedding"].get<std::vector<double>>();
    ++filled;
  }
  if (filled != texts.size()) out.resize(filled);  // the gateway reports the count mismatch
  return out;
}

}  // namespace conquer::llm
