#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conquer {

enum class Level { PrimarySchool, HighSchool, PhD };

enum class Variant { Baseline, ConQuer, NoConceptExtraction, ConceptNetSource, NoSummary };

enum class ConceptOrigin { LlmExtracted, StopwordStripped };

enum class KnowledgeSource { Wikipedia, ConceptNet };

enum class Dimension { EducationalValue, Diversity, AreaRelevance, DifficultyAppropriateness, Comprehensiveness };

inline constexpr std::size_t kDimensionCount = 5;
inline constexpr std::array<Dimension, kDimensionCount> kDimensions = {
    Dimension::EducationalValue, Dimension::Diversity, Dimension::AreaRelevance,
    Dimension::DifficultyAppropriateness, Dimension::Comprehensiveness};

inline constexpr std::array<Level, 3> kLevels = {Level::PrimarySchool, Level::HighSchool, Level::PhD};
inline constexpr std::array<Variant, 5> kVariants = {Variant::Baseline, Variant::ConQuer,
                                                     Variant::NoConceptExtraction, Variant::ConceptNetSource,
                                                     Variant::NoSummary};

// Wire names (snake_case) and parsers. Parsers throw Error(InvalidValue).
std::string_view to_string(Level level);
std::string_view to_string(Variant variant);
std::string_view to_string(ConceptOrigin origin);
std::string_view to_string(KnowledgeSource source);
Level parse_level(std::string_view s);
Variant parse_variant(std::string_view s);
ConceptOrigin parse_concept_origin(std::string_view s);
KnowledgeSource parse_knowledge_source(std::string_view s);

/// Human-readable level used inside prompts ("primary school", "PhD").
std::string_view level_display(Level level);
/// Snake-case key used in JSONL and CSV ("educational_value").
std::string_view dimension_key(Dimension d);
/// Label used by the judge prompts ("Educational Value").
std::string_view dimension_label(Dimension d);
constexpr std::size_t index_of(Dimension d) { return static_cast<std::size_t>(d); }

/// The configured subject-area vocabulary (config/areas.json).
class AreaCatalog {
 public:
  AreaCatalog() = default;
  explicit AreaCatalog(std::vector<std::string> areas);
  static AreaCatalog load(const std::filesystem::path& path);

  bool contains(std::string_view area) const;
  const std::vector<std::string>& areas() const { return areas_; }

 private:
  std::vector<std::string> areas_;
};

struct StudentQuestion {
  std::string id;
  std::string area;
  Level level = Level::PrimarySchool;
  std::string text;

  bool operator==(const StudentQuestion&) const = default;
};

/// Throws Error(EmptyField / InvalidValue). The area check is skipped when
/// no catalog is given.
void validate(const StudentQuestion& q, const AreaCatalog* catalog = nullptr);

inline constexpr std::size_t kQuizzesPerSet = 3;
inline constexpr std::size_t kOptionsPerQuiz = 4;

struct Quiz {
  /// The correct answer is always option A.
  static constexpr std::size_t kCorrectIndex = 0;

  std::string question;
  std::array<std::string, kOptionsPerQuiz> options;

  const std::string& correct_answer() const { return options[kCorrectIndex]; }
  bool operator==(const Quiz&) const = default;
};

struct QuizSet {
  std::string question_id;
  Variant variant = Variant::Baseline;
  std::vector<Quiz> quizzes;

  bool operator==(const QuizSet&) const = default;
};

// Unvalidated shapes as produced by the output parser or by deserialization.
struct QuizCandidate {
  std::string question;
  std::vector<std::string> options;
};

struct QuizSetCandidate {
  std::string question_id;
  Variant variant = Variant::Baseline;
  std::vector<QuizCandidate> quizzes;
};

/// Accepts the candidate iff it has exactly three quizzes, each with a
/// non-empty question and four non-empty options that are pairwise distinct
/// after whitespace normalization. Errors name the offending quiz index.
QuizSet validate_quiz_set(const QuizSetCandidate& raw);
QuizSetCandidate to_candidate(const QuizSet& qs);

inline constexpr std::size_t kMaxConcepts = 32;

struct ConceptSet {
  std::string question_id;
  std::vector<std::string> concepts;
  ConceptOrigin origin = ConceptOrigin::LlmExtracted;

  bool operator==(const ConceptSet&) const = default;
};

/// Trims, drops empties, de-duplicates case-insensitively (first occurrence
/// wins) and caps at kMaxConcepts. Throws Error(EmptyField) if nothing is left.
ConceptSet make_concept_set(std::string question_id, const std::vector<std::string>& raw, ConceptOrigin origin);

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const TokenSpan&) const = default;
};

struct KnowledgeChunk {
  KnowledgeSource source = KnowledgeSource::Wikipedia;
  std::string concept_name;
  std::string article_title;
  std::string text;
  TokenSpan token_span;
  std::optional<double> similarity;

  bool operator==(const KnowledgeChunk&) const = default;
};

/// Provenance of a chunk without its text.
struct ChunkRef {
  KnowledgeSource source = KnowledgeSource::Wikipedia;
  std::string concept_name;
  std::string article_title;
  TokenSpan token_span;

  bool operator==(const ChunkRef&) const = default;
};

ChunkRef ref_of(const KnowledgeChunk& chunk);

struct Summary {
  std::string question_id;
  std::string text;
  std::vector<ChunkRef> source_chunks;

  bool operator==(const Summary&) const = default;
};

class DimensionScores {
 public:
  DimensionScores() = default;
  /// Throws Error(ValueOutOfDomain) unless every score is in [1, 5].
  explicit DimensionScores(const std::array<int, kDimensionCount>& values);

  int operator[](Dimension d) const { return values_[index_of(d)]; }
  const std::array<int, kDimensionCount>& values() const { return values_; }
  bool operator==(const DimensionScores&) const = default;

 private:
  std::array<int, kDimensionCount> values_{1, 1, 1, 1, 1};
};

enum class PresentationOrder { AFirst, BFirst };
enum class Choice { First, Second };

std::string_view to_string(PresentationOrder order);
PresentationOrder parse_order(std::string_view s);

struct PairVerdict {
  PresentationOrder order = PresentationOrder::AFirst;
  std::array<Choice, kDimensionCount> choices{};

  Choice operator[](Dimension d) const { return choices[index_of(d)]; }
  bool operator==(const PairVerdict&) const = default;
};

enum class Normalization { Times20, Affine };
enum class CorrelationMethod { Pearson, Spearman };

struct RunConfig {
  Variant variant = Variant::ConQuer;
  std::size_t chunk_size = 128;
  std::size_t chunk_overlap = 50;
  std::size_t top_k = 3;
  /// Take top_k per concept instead of globally.
  bool per_concept_top_k = false;
  std::string generator_model = "gpt-4o-mini";
  std::string judge_model = "gpt-4o";
  std::string embedding_model = "text-embedding-3-large";
  double generation_temperature = 0.7;
  double judge_temperature = 0.0;
  int max_output_tokens = 1024;
  std::string cache_dir = "cache";
  std::uint64_t seed = 0;
  std::size_t max_parallel_questions = 4;
  double requests_per_minute = 0.0;  // 0 disables rate limiting
  int max_attempts = 4;
  Normalization normalization = Normalization::Times20;
  CorrelationMethod correlation = CorrelationMethod::Pearson;
  bool mock = false;
  std::string corpus_dir;
  std::string prompts_dir = "prompts";
  std::string areas_path = "config/areas.json";

  bool operator==(const RunConfig&) const = default;
};

/// Throws Error(ConfigError).
void validate(const RunConfig& cfg);

}  // namespace conquer
