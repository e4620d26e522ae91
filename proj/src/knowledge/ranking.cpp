#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "conquer/error.hpp"
#include "conquer/knowledge/knowledge.hpp"

namespace conquer::knowledge {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(Errc::DimensionMismatch,
                "vector lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<KnowledgeChunk> rank_chunks(std::span<const double> query, const std::vector<EmbeddedChunk>& chunks,
                                        std::size_t k) {
  if (k == 0) throw Error(Errc::InvalidValue, "rank_chunks: k must be >= 1");

  // document order = first appearance of (source, concept, title) in the input
  std::map<std::tuple<KnowledgeSource, std::string, std::string>, std::size_t> doc_order;
  struct Entry {
    double sim;
    std::size_t doc;
    std::size_t span_start;
    std::size_t input;
  };
  std::vector<Entry> entries;
  entries.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i].first;
    auto key = std::make_tuple(c.source, c.concept_name, c.article_title);
    auto [it, _] = doc_order.try_emplace(key, doc_order.size());
    entries.push_back({cosine_similarity(query, chunks[i].second), it->second, c.token_span.start, i});
  }

  const std::size_t n = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n), entries.end(),
                    [](const Entry& a, const Entry& b) {
                      if (a.sim != b.sim) return a.sim > b.sim;
                      return std::tie(a.doc, a.span_start, a.input) < std::tie(b.doc, b.span_start, b.input);
                    });

  std::vector<KnowledgeChunk> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    KnowledgeChunk c = chunks[entries[i].input].first;
    c.similarity = entries[i].sim;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace conquer::knowledge
