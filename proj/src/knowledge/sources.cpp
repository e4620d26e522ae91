#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cctype>
#include <stdexcept>

#include "conquer/error.hpp"
#include "conquer/knowledge/knowledge.hpp"
#include "conquer/llm/openai_backend.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer::knowledge {
namespace {

constexpr const char* kUserAgent = "conquer-quiz-pipeline/1.0 (research tooling)";

void require_concept(const std::string& concept_name) {
  if (text::trim(concept_name).empty()) throw std::invalid_argument("fetch: concept must be non-empty");
}

nlohmann::json get_json(const std::string& base_url, const std::string& path, const httplib::Params& params) {
  auto base = llm::BaseUrl::parse(base_url);
  httplib::Client cli(base.origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(30);
  cli.set_follow_location(true);
  httplib::Headers headers{{"User-Agent", kUserAgent}, {"Accept", "application/json"}};
  auto res = cli.Get(base.prefix + path, params, headers);
  if (!res) throw Error(Errc::Unreachable, base_url + path + ": " + httplib::to_string(res.error()));
  if (res->status == 404) throw Error(Errc::NotFound, base_url + path + ": http 404");
  if (res->status < 200 || res->status >= 300)
    throw Error(Errc::Unreachable, base_url + path + ": http " + std::to_string(res->status));
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::Unreachable, base_url + path + ": response is not JSON");
  return j;
}

// "AtLocation" -> "at location"
std::string relation_phrase(std::string_view label) {
  std::string out;
  for (char c : label) {
    if (std::isupper(static_cast<unsigned char>(c)) && !out.empty()) out.push_back(' ');
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string title_from_term(std::string_view concept_name) {
  std::string t = text::trim(concept_name);
  for (char& c : t)
    if (c == '_') c = ' ';
  if (!t.empty()) t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
  return t;
}

std::string label_of(const nlohmann::json& node) {
  if (node.is_object() && node.contains("label") && node["label"].is_string()) return node["label"].get<std::string>();
  return {};
}

}  // namespace

std::string normalize_term(std::string_view concept_name) {
  std::string out;
  for (char c : text::trim(concept_name)) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isspace(u)) out.push_back('_');
    else if (std::isalnum(u) || c == '_' || c == '-') out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

std::string strip_link_brackets(std::string_view surface_text) {
  std::string out;
  out.reserve(surface_text.size());
  for (std::size_t i = 0; i < surface_text.size(); ++i) {
    if (i + 1 < surface_text.size() &&
        ((surface_text[i] == '[' && surface_text[i + 1] == '[') || (surface_text[i] == ']' && surface_text[i + 1] == ']'))) {
      ++i;
      continue;
    }
    out.push_back(surface_text[i]);
  }
  return out;
}

SourceDocument render_conceptnet(const std::string& concept_name, const nlohmann::json& node, std::size_t edge_limit) {
  SourceDocument doc{KnowledgeSource::ConceptNet, concept_name, title_from_term(concept_name), {}};
  if (!node.is_object() || !node.contains("edges") || !node["edges"].is_array())
    throw Error(Errc::NotFound, "ConceptNet node for '" + concept_name + "' has no edges");
  std::size_t used = 0;
  for (const auto& edge : node["edges"]) {
    if (used == edge_limit) break;
    ++used;
    std::string line;
    if (edge.contains("surfaceText") && edge["surfaceText"].is_string())
      line = text::trim(strip_link_brackets(edge["surfaceText"].get<std::string>()));
    if (line.empty()) {
      std::string start = label_of(edge.value("start", nlohmann::json{}));
      std::string rel = relation_phrase(label_of(edge.value("rel", nlohmann::json{})));
      std::string end = label_of(edge.value("end", nlohmann::json{}));
      if (start.empty() || rel.empty() || end.empty()) continue;
      line = start + " " + rel + " " + end;
    }
    if (!doc.text.empty()) doc.text.push_back('\n');
    doc.text += text::normalize_space(line);
  }
  if (doc.text.empty()) throw Error(Errc::NotFound, "ConceptNet node for '" + concept_name + "' has no renderable edges");
  return doc;
}

WikipediaSource::WikipediaSource(std::string base_url, std::optional<std::filesystem::path> cache_dir)
    : base_url_(std::move(base_url)), cache_dir_(std::move(cache_dir)) {}

SourceDocument WikipediaSource::fetch(const std::string& concept_name) {
  require_concept(concept_name);
  std::optional<std::filesystem::path> cached;
  if (cache_dir_) {
    cached = *cache_dir_ / "wikipedia" / (llm::sha256_hex(text::to_lower(text::trim(concept_name))) + ".json");
    std::error_code ec;
    if (std::filesystem::exists(*cached, ec)) {
      auto j = nlohmann::json::parse(read_file(*cached), nullptr, false);
      if (!j.is_discarded() && j.contains("title") && j.contains("text"))
        return {KnowledgeSource::Wikipedia, concept_name, j["title"].get<std::string>(), j["text"].get<std::string>()};
    }
  }

  auto search = get_json(base_url_, "/w/api.php",
                         {{"action", "query"}, {"list", "search"}, {"srsearch", concept_name},
                          {"srlimit", "1"}, {"format", "json"}});
  const auto& hits = search.value("query", nlohmann::json::object()).value("search", nlohmann::json::array());
  if (!hits.is_array() || hits.empty() || !hits[0].contains("title"))
    throw Error(Errc::NotFound, "no Wikipedia search hit for '" + concept_name + "'");
  const std::string title = hits[0]["title"].get<std::string>();

  auto page = get_json(base_url_, "/w/api.php",
                       {{"action", "query"}, {"prop", "extracts"}, {"explaintext", "1"}, {"redirects", "1"},
                        {"titles", title}, {"format", "json"}});
  std::string extract;
  const auto& pages = page.value("query", nlohmann::json::object()).value("pages", nlohmann::json::object());
  for (const auto& [id, p] : pages.items()) {
    if (p.contains("extract") && p["extract"].is_string()) {
      extract = p["extract"].get<std::string>();
      break;
    }
  }
  if (text::trim(extract).empty()) throw Error(Errc::NotFound, "Wikipedia page '" + title + "' has no extract");

  SourceDocument doc{KnowledgeSource::Wikipedia, concept_name, title, extract};
  if (cached) write_file(*cached, nlohmann::json{{"concept", concept_name}, {"title", title}, {"text", extract}}.dump());
  return doc;
}

ConceptNetSource::ConceptNetSource(std::string base_url, std::size_t edge_limit)
    : base_url_(std::move(base_url)), edge_limit_(edge_limit) {}

SourceDocument ConceptNetSource::fetch(const std::string& concept_name) {
  require_concept(concept_name);
  const std::string term = normalize_term(concept_name);
  if (term.empty()) throw Error(Errc::NotFound, "concept '" + concept_name + "' has no ConceptNet form");
  auto node = get_json(base_url_, "/c/en/" + term, {{"limit", std::to_string(edge_limit_)}});
  return render_conceptnet(concept_name, node, edge_limit_);
}

FixtureSource::FixtureSource(std::filesystem::path dir, KnowledgeSource kind, std::size_t edge_limit)
    : dir_(std::move(dir)), kind_(kind), edge_limit_(edge_limit) {}

SourceDocument FixtureSource::fetch(const std::string& concept_name) {
  require_concept(concept_name);
  const std::string term = normalize_term(concept_name);
  if (term.empty()) throw Error(Errc::NotFound, "concept '" + concept_name + "' has no fixture name");
  // "ecosystems" finds ecosystem.txt, standing in for search-side stemming
  auto locate = [&](const std::filesystem::path& dir, const std::string& ext) {
    std::error_code ec;
    auto path = dir / (term + ext);
    if (!std::filesystem::exists(path, ec) && term.size() > 3 && term.back() == 's') {
      auto singular = dir / (term.substr(0, term.size() - 1) + ext);
      if (std::filesystem::exists(singular, ec)) return singular;
    }
    return path;
  };
  std::error_code ec;
  if (kind_ == KnowledgeSource::ConceptNet) {
    auto path = locate(dir_ / "conceptnet", ".json");
    if (!std::filesystem::exists(path, ec)) throw Error(Errc::NotFound, "no ConceptNet fixture " + path.string());
    auto node = nlohmann::json::parse(read_file(path), nullptr, false);
    if (node.is_discarded()) throw Error(Errc::Unreachable, "fixture " + path.string() + " is not JSON");
    return render_conceptnet(concept_name, node, edge_limit_);
  }
  auto path = locate(dir_, ".txt");
  if (!std::filesystem::exists(path, ec)) throw Error(Errc::NotFound, "no Wikipedia fixture " + path.string());
  std::string body = read_file(path);
  std::string title = title_from_term(term);
  if (text::starts_with_ci(body, "Title:")) {
    auto nl = body.find('\n');
    title = text::trim(body.substr(6, nl == std::string::npos ? std::string::npos : nl - 6));
    body = nl == std::string::npos ? std::string{} : body.substr(nl + 1);
  }
  if (text::trim(body).empty()) throw Error(Errc::NotFound, "fixture " + path.string() + " is empty");
  return {KnowledgeSource::Wikipedia, concept_name, title, body};
}

}  // namespace conquer::knowledge
