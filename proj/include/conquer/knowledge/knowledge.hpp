#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "conquer/domain.hpp"
#include "conquer/llm/gateway.hpp"

namespace conquer::knowledge {

struct SourceDocument {
  KnowledgeSource source = KnowledgeSource::Wikipedia;
  std::string concept_name;
  std::string title;
  std::string text;

  bool operator==(const SourceDocument&) const = default;
};

/// Byte range of one token inside the tokenized text.
struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
};

/// Whitespace-delimited words; the default chunking unit.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
};

/// Sliding window with stride chunk_size - chunk_overlap; the last window
/// may be shorter. Chunk text is the source substring from the first to the
/// last token of the window. Requires chunk_overlap < chunk_size and a
/// non-empty document (throws std::invalid_argument otherwise).
std::vector<KnowledgeChunk> chunk_text(const SourceDocument& doc, std::size_t chunk_size, std::size_t chunk_overlap,
                                       const Tokenizer& tokenizer = WhitespaceTokenizer{});

/// Number of windows chunk_text produces for n tokens.
std::size_t expected_chunk_count(std::size_t n_tokens, std::size_t chunk_size, std::size_t chunk_overlap);

/// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero norm.
/// Throws Error(DimensionMismatch) on length mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

using EmbeddedChunk = std::pair<KnowledgeChunk, std::vector<double>>;

/// Top min(k, n) chunks by descending cosine similarity to `query`, each
/// with `similarity` set. Ties go to the chunk whose document appears first
/// in the input, then to the lower token_span.start, then input order.
std::vector<KnowledgeChunk> rank_chunks(std::span<const double> query, const std::vector<EmbeddedChunk>& chunks,
                                        std::size_t k);

/// A knowledge source that resolves one concept to one document.
/// fetch() throws Error(NotFound) or Error(Unreachable); an empty concept is
/// a precondition violation (std::invalid_argument).
class DocumentSource {
 public:
  virtual ~DocumentSource() = default;
  virtual KnowledgeSource kind() const = 0;
  virtual SourceDocument fetch(const std::string& concept_name) = 0;
};

/// Lowercase, spaces to '_', everything but [a-z0-9_-] dropped. Used for
/// ConceptNet node names and fixture file names.
std::string normalize_term(std::string_view concept_name);

/// "Find [[a money]] in [[a bank]]" -> "Find a money in a bank".
std::string strip_link_brackets(std::string_view surface_text);

/// Renders a ConceptNet node response into one sentence per edge, using
/// the edge's surface text when present and "<start> <relation> <end>"
/// otherwise. Throws Error(NotFound) when no edge renders.
SourceDocument render_conceptnet(const std::string& concept_name, const nlohmann::json& node, std::size_t edge_limit = 20);

/// MediaWiki client: list=search for the first hit, then the plain-text
/// extract of that page. Documents are cached on disk keyed by concept.
class WikipediaSource final : public DocumentSource {
 public:
  explicit WikipediaSource(std::string base_url = "https://en.wikipedia.org",
                           std::optional<std::filesystem::path> cache_dir = std::nullopt);
  KnowledgeSource kind() const override { return KnowledgeSource::Wikipedia; }
  SourceDocument fetch(const std::string& concept_name) override;

 private:
  std::string base_url_;
  std::optional<std::filesystem::path> cache_dir_;
};

class ConceptNetSource final : public DocumentSource {
 public:
  explicit ConceptNetSource(std::string base_url = "http://api.conceptnet.io", std::size_t edge_limit = 20);
  KnowledgeSource kind() const override { return KnowledgeSource::ConceptNet; }
  SourceDocument fetch(const std::string& concept_name) override;

 private:
  std::string base_url_;
  std::size_t edge_limit_;
};

/// Local corpus for hermetic runs. Wikipedia documents are read from
/// `<dir>/<term>.txt`; ConceptNet node responses from
/// `<dir>/conceptnet/<term>.json` and rendered like live responses. A
/// plural term falls back to the file without its trailing "s".
class FixtureSource final : public DocumentSource {
 public:
  FixtureSource(std::filesystem::path dir, KnowledgeSource kind, std::size_t edge_limit = 20);
  KnowledgeSource kind() const override { return kind_; }
  SourceDocument fetch(const std::string& concept_name) override;

 private:
  std::filesystem::path dir_;
  KnowledgeSource kind_;
  std::size_t edge_limit_;
};

struct RetrievalParams {
  std::size_t chunk_size = 128;
  std::size_t chunk_overlap = 50;
  std::size_t top_k = 3;
  bool per_concept = false;
};

struct RetrievalQuery {
  std::string question_text;
  ConceptSet concepts;
  RetrievalParams params;
};

/// Fetches one document per concept (NotFound concepts are skipped), chunks
/// them, embeds the chunks and the question text, and returns the global
/// top-k chunks by similarity to the question (or top-k per concept when
/// params.per_concept). Throws Error(AllConceptsFailed) if no fetch succeeds.
std::vector<KnowledgeChunk> retrieve(const RetrievalQuery& query, DocumentSource& source, llm::Gateway& gateway,
                                     const std::string& embedding_model,
                                     const Tokenizer& tokenizer = WhitespaceTokenizer{});

}  // namespace conquer::knowledge
