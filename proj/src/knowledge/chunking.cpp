#include <cctype>
#include <stdexcept>

#include "conquer/knowledge/knowledge.hpp"

namespace conquer::knowledge {

std::vector<Token> WhitespaceTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const auto space = [&](std::size_t k) { return std::isspace(static_cast<unsigned char>(text[k])) != 0; };
  while (i < text.size()) {
    while (i < text.size() && space(i)) ++i;
    std::size_t j = i;
    while (j < text.size() && !space(j)) ++j;
    if (j > i) tokens.push_back({i, j});
    i = j;
  }
  return tokens;
}

std::size_t expected_chunk_count(std::size_t n_tokens, std::size_t chunk_size, std::size_t chunk_overlap) {
  if (n_tokens == 0) return 0;
  if (n_tokens <= chunk_size) return 1;
  const std::size_t stride = chunk_size - chunk_overlap;
  return (n_tokens - chunk_size + stride - 1) / stride + 1;
}

std::vector<KnowledgeChunk> chunk_text(const SourceDocument& doc, std::size_t chunk_size, std::size_t chunk_overlap,
                                       const Tokenizer& tokenizer) {
  if (chunk_size == 0 || chunk_overlap >= chunk_size)
    throw std::invalid_argument("chunk_text: need 0 <= chunk_overlap < chunk_size");
  const auto tokens = tokenizer.tokenize(doc.text);
  if (tokens.empty()) throw std::invalid_argument("chunk_text: document '" + doc.title + "' has no tokens");

  const std::size_t stride = chunk_size - chunk_overlap;
  std::vector<KnowledgeChunk> chunks;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(tokens.size(), start + chunk_size);
    KnowledgeChunk c;
    c.source = doc.source;
    c.concept_name = doc.concept_name;
    c.article_title = doc.title;
    c.token_span = {start, end};
    c.text = doc.text.substr(tokens[start].begin, tokens[end - 1].end - tokens[start].begin);
    chunks.push_back(std::move(c));
    if (end == tokens.size()) break;
  }
  return chunks;
}

}  // namespace conquer::knowledge
