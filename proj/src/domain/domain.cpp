#include "conquer/domain.hpp"

#include <algorithm>
#include <unordered_set>

#include "conquer/error.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::WrongQuizCount: return "WrongQuizCount";
    case Errc::WrongOptionCount: return "WrongOptionCount";
    case Errc::DuplicateOptions: return "DuplicateOptions";
    case Errc::EmptyField: return "EmptyField";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::ProviderUnreachable: return "ProviderUnreachable";
    case Errc::ProviderRejected: return "ProviderRejected";
    case Errc::EmptyCompletion: return "EmptyCompletion";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotFound: return "NotFound";
    case Errc::Unreachable: return "Unreachable";
    case Errc::AllConceptsFailed: return "AllConceptsFailed";
    case Errc::UnparseableConceptList: return "UnparseableConceptList";
    case Errc::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case Errc::MarkerCountMismatch: return "MarkerCountMismatch";
    case Errc::MalformedBlock: return "MalformedBlock";
    case Errc::StageFailed: return "StageFailed";
    case Errc::NoJsonFound: return "NoJsonFound";
    case Errc::MissingKey: return "MissingKey";
    case Errc::UnexpectedKey: return "UnexpectedKey";
    case Errc::ValueOutOfDomain: return "ValueOutOfDomain";
    case Errc::JudgeUnparseable: return "JudgeUnparseable";
    case Errc::OrderPairIncomplete: return "OrderPairIncomplete";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::CellGenerationFailed: return "CellGenerationFailed";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::CellCountMismatch: return "CellCountMismatch";
    case Errc::QuestionSetMismatch: return "QuestionSetMismatch";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::PrimarySchool: return "primary_school";
    case Level::HighSchool: return "high_school";
    case Level::PhD: return "phd";
  }
  return "";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Baseline: return "baseline";
    case Variant::ConQuer: return "conquer";
    case Variant::NoConceptExtraction: return "no_concept_extraction";
    case Variant::ConceptNetSource: return "conceptnet_source";
    case Variant::NoSummary: return "no_summary";
  }
  return "";
}

std::string_view to_string(ConceptOrigin origin) {
  return origin == ConceptOrigin::LlmExtracted ? "llm_extracted" : "stopword_stripped";
}

std::string_view to_string(KnowledgeSource source) {
  return source == KnowledgeSource::Wikipedia ? "wikipedia" : "conceptnet";
}

std::string_view to_string(PresentationOrder order) {
  return order == PresentationOrder::AFirst ? "a_first" : "b_first";
}

Level parse_level(std::string_view s) {
  for (Level l : kLevels)
    if (to_string(l) == s) return l;
  throw Error(Errc::InvalidValue, "unknown level '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  for (Variant v : kVariants)
    if (to_string(v) == s) return v;
  throw Error(Errc::InvalidValue, "unknown variant '" + std::string(s) + "'");
}

ConceptOrigin parse_concept_origin(std::string_view s) {
  if (s == "llm_extracted") return ConceptOrigin::LlmExtracted;
  if (s == "stopword_stripped") return ConceptOrigin::StopwordStripped;
  throw Error(Errc::InvalidValue, "unknown concept origin '" + std::string(s) + "'");
}

KnowledgeSource parse_knowledge_source(std::string_view s) {
  if (s == "wikipedia") return KnowledgeSource::Wikipedia;
  if (s == "conceptnet") return KnowledgeSource::ConceptNet;
  throw Error(Errc::InvalidValue, "unknown knowledge source '" + std::string(s) + "'");
}

PresentationOrder parse_order(std::string_view s) {
  if (s == "a_first") return PresentationOrder::AFirst;
  if (s == "b_first") return PresentationOrder::BFirst;
  throw Error(Errc::InvalidValue, "unknown presentation order '" + std::string(s) + "'");
}

std::string_view level_display(Level level) {
  switch (level) {
    case Level::PrimarySchool: return "primary school";
    case Level::HighSchool: return "high school";
    case Level::PhD: return "PhD";
  }
  return "";
}

std::string_view dimension_key(Dimension d) {
  switch (d) {
    case Dimension::EducationalValue: return "educational_value";
    case Dimension::Diversity: return "diversity";
    case Dimension::AreaRelevance: return "area_relevance";
    case Dimension::DifficultyAppropriateness: return "difficulty_appropriateness";
    case Dimension::Comprehensiveness: return "comprehensiveness";
  }
  return "";
}

std::string_view dimension_label(Dimension d) {
  switch (d) {
    case Dimension::EducationalValue: return "Educational Value";
    case Dimension::Diversity: return "Diversity";
    case Dimension::AreaRelevance: return "Area Relevance";
    case Dimension::DifficultyAppropriateness: return "Difficulty Appropriateness";
    case Dimension::Comprehensiveness: return "Comprehensiveness";
  }
  return "";
}

AreaCatalog::AreaCatalog(std::vector<std::string> areas) : areas_(std::move(areas)) {}

AreaCatalog AreaCatalog::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  if (!j.contains("areas") || !j["areas"].is_array())
    throw Error(Errc::ConfigError, path.string() + ": missing 'areas' array");
  std::vector<std::string> areas;
  for (const auto& a : j["areas"]) {
    if (!a.is_string() || text::trim(a.get<std::string>()).empty())
      throw Error(Errc::ConfigError, path.string() + ": area labels must be non-empty strings");
    areas.push_back(a.get<std::string>());
  }
  return AreaCatalog(std::move(areas));
}

bool AreaCatalog::contains(std::string_view area) const {
  return std::find(areas_.begin(), areas_.end(), area) != areas_.end();
}

void validate(const StudentQuestion& q, const AreaCatalog* catalog) {
  if (text::trim(q.id).empty()) throw Error(Errc::EmptyField, "question id is empty");
  if (text::trim(q.text).empty()) throw Error(Errc::EmptyField, "question '" + q.id + "' has empty text");
  if (text::trim(q.area).empty()) throw Error(Errc::EmptyField, "question '" + q.id + "' has empty area");
  if (catalog && !catalog->contains(q.area))
    throw Error(Errc::InvalidValue, "question '" + q.id + "' has unknown area '" + q.area + "'");
}

QuizSet validate_quiz_set(const QuizSetCandidate& raw) {
  if (raw.quizzes.size() != kQuizzesPerSet)
    throw Error(Errc::WrongQuizCount,
                "expected " + std::to_string(kQuizzesPerSet) + " quizzes, got " + std::to_string(raw.quizzes.size()));
  QuizSet out;
  out.question_id = raw.question_id;
  out.variant = raw.variant;
  for (std::size_t i = 0; i < raw.quizzes.size(); ++i) {
    const auto& cand = raw.quizzes[i];
    const std::string where = "quiz " + std::to_string(i);
    if (cand.options.size() != kOptionsPerQuiz)
      throw Error(Errc::WrongOptionCount, where + " has " + std::to_string(cand.options.size()) + " options", i);
    if (text::trim(cand.question).empty()) throw Error(Errc::EmptyField, where + " has an empty question", i);
    Quiz quiz;
    quiz.question = cand.question;
    std::unordered_set<std::string> seen;
    for (std::size_t k = 0; k < kOptionsPerQuiz; ++k) {
      std::string norm = text::normalize_space(cand.options[k]);
      if (norm.empty()) throw Error(Errc::EmptyField, where + " has an empty option " + char('A' + k), i);
      if (!seen.insert(norm).second) throw Error(Errc::DuplicateOptions, where + " repeats option '" + norm + "'", i);
      quiz.options[k] = cand.options[k];
    }
    out.quizzes.push_back(std::move(quiz));
  }
  return out;
}

QuizSetCandidate to_candidate(const QuizSet& qs) {
  QuizSetCandidate c;
  c.question_id = qs.question_id;
  c.variant = qs.variant;
  for (const auto& q : qs.quizzes) c.quizzes.push_back({q.question, {q.options.begin(), q.options.end()}});
  return c;
}

ConceptSet make_concept_set(std::string question_id, const std::vector<std::string>& raw, ConceptOrigin origin) {
  ConceptSet cs;
  cs.question_id = std::move(question_id);
  cs.origin = origin;
  std::unordered_set<std::string> seen;
  for (const auto& item : raw) {
    std::string t = text::trim(item);
    if (t.empty()) continue;
    if (!seen.insert(text::to_lower(t)).second) continue;
    cs.concepts.push_back(std::move(t));
    if (cs.concepts.size() == kMaxConcepts) break;
  }
  if (cs.concepts.empty()) throw Error(Errc::EmptyField, "concept list is empty");
  return cs;
}

ChunkRef ref_of(const KnowledgeChunk& chunk) {
  return ChunkRef{chunk.source, chunk.concept_name, chunk.article_title, chunk.token_span};
}

DimensionScores::DimensionScores(const std::array<int, kDimensionCount>& values) : values_(values) {
  for (std::size_t i = 0; i < kDimensionCount; ++i) {
    if (values[i] < 1 || values[i] > 5)
      throw Error(Errc::ValueOutOfDomain, std::string(dimension_label(kDimensions[i])) + " score " +
                                               std::to_string(values[i]) + " outside [1, 5]");
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.chunk_size == 0) throw Error(Errc::ConfigError, "chunk_size must be positive");
  if (cfg.chunk_overlap >= cfg.chunk_size) throw Error(Errc::ConfigError, "chunk_overlap must be < chunk_size");
  if (cfg.top_k == 0) throw Error(Errc::ConfigError, "top_k must be >= 1");
  if (cfg.max_parallel_questions == 0) throw Error(Errc::ConfigError, "max_parallel_questions must be >= 1");
  if (cfg.generation_temperature < 0 || cfg.judge_temperature < 0)
    throw Error(Errc::ConfigError, "temperatures must be >= 0");
  if (cfg.max_output_tokens <= 0) throw Error(Errc::ConfigError, "max_output_tokens must be positive");
  if (cfg.max_attempts <= 0) throw Error(Errc::ConfigError, "max_attempts must be positive");
  if (cfg.requests_per_minute < 0) throw Error(Errc::ConfigError, "requests_per_minute must be >= 0");
}

}  // namespace conquer
