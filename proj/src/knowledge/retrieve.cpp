#include <map>
#include <stdexcept>

#include "conquer/error.hpp"
#include "conquer/knowledge/knowledge.hpp"

namespace conquer::knowledge {

std::vector<KnowledgeChunk> retrieve(const RetrievalQuery& query, DocumentSource& source, llm::Gateway& gateway,
                                     const std::string& embedding_model, const Tokenizer& tokenizer) {
  if (query.concepts.concepts.empty()) throw std::invalid_argument("retrieve: concept set is empty");
  const auto& p = query.params;
  if (p.top_k == 0) throw Error(Errc::InvalidValue, "retrieve: top_k must be >= 1");

  std::vector<KnowledgeChunk> pool;
  std::size_t fetched = 0;
  std::string last_miss;
  for (const auto& concept_name : query.concepts.concepts) {
    SourceDocument doc;
    try {
      doc = source.fetch(concept_name);
    } catch (const Error& e) {
      if (e.code() != Errc::NotFound) throw;
      last_miss = e.what();
      continue;
    }
    ++fetched;
    auto chunks = chunk_text(doc, p.chunk_size, p.chunk_overlap, tokenizer);
    for (auto& c : chunks) pool.push_back(std::move(c));
  }
  if (fetched == 0)
    throw Error(Errc::AllConceptsFailed, "no concept of question '" + query.concepts.question_id +
                                             "' resolved to a document (last: " + last_miss + ")");

  std::vector<std::string> texts;
  texts.reserve(pool.size() + 1);
  for (const auto& c : pool) texts.push_back(c.text);
  texts.push_back(query.question_text);
  auto vectors = gateway.embed(texts, embedding_model);
  const auto& qvec = vectors.back().values;

  if (!p.per_concept) {
    std::vector<EmbeddedChunk> embedded;
    embedded.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) embedded.emplace_back(std::move(pool[i]), std::move(vectors[i].values));
    return rank_chunks(qvec, embedded, p.top_k);
  }

  // per-concept mode: top_k from each concept's pool, concepts in query order
  std::vector<std::string> order;
  std::map<std::string, std::vector<EmbeddedChunk>> by_concept;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto [it, inserted] = by_concept.try_emplace(pool[i].concept_name);
    if (inserted) order.push_back(pool[i].concept_name);
    it->second.emplace_back(std::move(pool[i]), std::move(vectors[i].values));
  }
  std::vector<KnowledgeChunk> out;
  for (const auto& concept_name : order)
    for (auto& c : rank_chunks(qvec, by_concept[concept_name], p.top_k)) out.push_back(std::move(c));
  return out;
}

}  // namespace conquer::knowledge
