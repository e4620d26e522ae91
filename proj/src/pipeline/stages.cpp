#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "conquer/pipeline/pipeline.hpp"
#include "conquer/text.hpp"

namespace conquer::pipeline {
namespace {

constexpr std::size_t kMaxConceptWords = 5;

std::string strip_list_prefix(std::string s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == '-' || s[i] == '*' || s[i] == ' ' || s[i] == '\t')) ++i;
  if (s.compare(i, 3, "\xE2\x80\xA2") == 0) i += 3;  // bullet
  std::size_t d = i;
  while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
  if (d > i && d < s.size() && (s[d] == '.' || s[d] == ')')) i = d + 1;
  return text::trim(std::string_view(s).substr(i));
}

std::string strip_decoration(std::string s) {
  s = text::trim(s);
  auto junk = [](char c) { return c == '"' || c == '\'' || c == '*' || c == '`' || c == '.'; };
  while (!s.empty() && junk(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && junk(s[i])) ++i;
  return text::trim(std::string_view(s).substr(i));
}

llm::ChatRequest generator_request(const StageContext& ctx, std::string prompt, int sample = 0) {
  llm::ChatRequest req;
  req.model = ctx.cfg.generator_model;
  req.user_prompt = std::move(prompt);
  req.temperature = ctx.cfg.generation_temperature;
  req.max_output_tokens = ctx.cfg.max_output_tokens;
  req.sample = sample;
  return req;
}

}  // namespace

std::vector<std::string> parse_concept_list(const std::string& raw) {
  std::vector<std::string> items;
  for (const auto& raw_line : text::split_lines(raw)) {
    std::string line = strip_list_prefix(text::trim(raw_line));
    if (line.empty() || line.back() == '?') continue;
    // "Key concepts: a, b" -> "a, b"
    if (auto colon = line.find(':'); colon != std::string::npos &&
                                     text::split_whitespace(line.substr(0, colon)).size() <= 3) {
      line = text::trim(std::string_view(line).substr(colon + 1));
    }
    std::vector<std::string> found;
    bool prose = false;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto end = line.find_first_of(",;", start);
      if (end == std::string::npos) end = line.size();
      std::string item = strip_decoration(line.substr(start, end - start));
      if (!item.empty()) {
        if (text::split_whitespace(item).size() > kMaxConceptWords) {
          prose = true;
          break;
        }
        found.push_back(item);
      }
      start = end + 1;
    }
    if (!prose) items.insert(items.end(), found.begin(), found.end());
  }
  if (items.empty()) throw Error(Errc::UnparseableConceptList, "no concept list in reply: " + raw.substr(0, 120));
  return items;
}

ConceptSet extract_concepts(const StudentQuestion& q, StageContext& ctx) {
  const std::string prompt = text::render_template(
      ctx.prompts.concepts, {{"area", q.area}, {"level", std::string(level_display(q.level))}, {"question", q.text}});
  auto reply = ctx.generator.chat(generator_request(ctx, prompt));
  return make_concept_set(q.id, parse_concept_list(reply.text), ConceptOrigin::LlmExtracted);
}

ConceptSet strip_stopwords(const StudentQuestion& q) {
  std::vector<std::string> kept;
  std::unordered_set<std::string> seen;
  for (auto& w : text::content_tokens(q.text)) {
    if (text::is_stopword(w) || !seen.insert(w).second) continue;
    kept.push_back(std::move(w));
  }
  if (kept.empty()) throw Error(Errc::EmptyAfterFiltering, "question '" + q.id + "' has only stopwords");
  return make_concept_set(q.id, kept, ConceptOrigin::StopwordStripped);
}

std::string render_chunk_context(const std::vector<KnowledgeChunk>& chunks) {
  std::string out;
  for (const auto& c : chunks) {
    if (!out.empty()) out += "\n\n";
    out += "Source: " + c.article_title + "\n" + c.text;
  }
  return out;
}

Summary summarize(const std::vector<KnowledgeChunk>& chunks, const StudentQuestion& q, StageContext& ctx) {
  if (chunks.empty()) throw std::invalid_argument("summarize: no chunks");
  const std::string prompt =
      text::render_template(ctx.prompts.summary, {{"area", q.area},
                                                  {"level", std::string(level_display(q.level))},
                                                  {"chunks", render_chunk_context(chunks)},
                                                  {"question", q.text}});
  auto reply = ctx.generator.chat(generator_request(ctx, prompt));
  Summary s{q.id, text::trim(reply.text), {}};
  if (s.text.empty()) throw Error(Errc::EmptyCompletion, "blank summary for question '" + q.id + "'");
  for (const auto& c : chunks) s.source_chunks.push_back(ref_of(c));
  return s;
}

std::string generate_quizzes(const StudentQuestion& q, const std::optional<std::string>& context, Variant variant,
                             StageContext& ctx, int sample) {
  auto reply = ctx.generator.chat(generator_request(ctx, render_generation_prompt(q, context, variant, ctx.prompts), sample));
  return reply.text;
}

}  // namespace conquer::pipeline
