#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conquer/domain.hpp"
#include "conquer/error.hpp"
#include "conquer/knowledge/knowledge.hpp"
#include "conquer/llm/gateway.hpp"

namespace conquer::pipeline {

/// Prompt templates, one file each under a prompts directory.
struct PromptLibrary {
  std::string baseline;
  std::string conquer;
  std::string concepts;
  std::string summary;
  std::string judge;
  std::string pairwise;
  std::string difficulty;
  std::string dataset;

  /// Reads every template from `dir`. A relative `dir` that does not exist
  /// falls back to the copy shipped with the sources.
  static PromptLibrary load(const std::filesystem::path& dir);
};

/// Resolves a repo-relative resource path: `p` itself when it exists,
/// otherwise the same relative path under the source tree.
std::filesystem::path resolve_resource(const std::filesystem::path& p);

/// Everything a stage needs to talk to the generator model.
struct StageContext {
  llm::Gateway& generator;
  const PromptLibrary& prompts;
  const RunConfig& cfg;
};

/// Knowledge sources by kind; either may be null if the variant never uses it.
struct Sources {
  std::shared_ptr<knowledge::DocumentSource> wikipedia;
  std::shared_ptr<knowledge::DocumentSource> conceptnet;
};

/// Splits a model reply into concept names: one item per line or per comma,
/// bullets and numbering stripped, items longer than five words dropped as
/// prose. Throws Error(UnparseableConceptList) if nothing list-shaped is left.
std::vector<std::string> parse_concept_list(const std::string& raw);

ConceptSet extract_concepts(const StudentQuestion& q, StageContext& ctx);

/// Deterministic, no model call. Throws Error(EmptyAfterFiltering).
ConceptSet strip_stopwords(const StudentQuestion& q);

/// Chunks as "Source: <title>\n<text>", separated by blank lines.
std::string render_chunk_context(const std::vector<KnowledgeChunk>& chunks);

/// Throws std::invalid_argument on an empty chunk list.
Summary summarize(const std::vector<KnowledgeChunk>& chunks, const StudentQuestion& q, StageContext& ctx);

/// Fills the baseline template (no context) or the grounded template.
/// Throws std::invalid_argument when the context does not match the variant.
std::string render_generation_prompt(const StudentQuestion& q, const std::optional<std::string>& context,
                                     Variant variant, const PromptLibrary& prompts);

/// Raw generator text for the rendered prompt. `sample` > 0 asks again.
std::string generate_quizzes(const StudentQuestion& q, const std::optional<std::string>& context, Variant variant,
                             StageContext& ctx, int sample = 0);

/// Parses exactly three `[Quiz]` blocks. Errors: MarkerCountMismatch,
/// MalformedBlock (with block index), then the validate_quiz_set errors.
QuizSet parse_quiz_output(const std::string& raw, const std::string& question_id = {},
                          Variant variant = Variant::Baseline);

/// The inverse of parse_quiz_output; also what the judges see.
std::string render_quiz_set(const QuizSet& qs);

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct PipelineResult {
  std::string question_id;
  Variant variant = Variant::Baseline;
  std::optional<ConceptSet> concepts;
  std::vector<KnowledgeChunk> retrieved;
  std::optional<Summary> summary;
  QuizSet quiz_set;
  std::string raw_generator_output;
  std::string generator_prompt;
  int generation_attempts = 1;
  /// Wall-clock; kept out of results.jsonl so results stay reproducible.
  std::vector<StageTiming> timing;
};

/// Thrown by run_question. The message names the stage and question id;
/// cause() is the code of the underlying error (StageFailed if it had none).
class StageError : public Error {
 public:
  StageError(std::string stage, std::string question_id, Errc cause, const std::string& detail);
  const std::string& stage() const noexcept { return stage_; }
  const std::string& question_id() const noexcept { return question_id_; }
  Errc cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  std::string question_id_;
  Errc cause_;
};

/// One question through the configured variant. Parse failures get exactly
/// one fresh generation before the question is given up.
PipelineResult run_question(const StudentQuestion& q, StageContext& ctx, const Sources& sources);

/// Checks the variant/field coherence rules; returns a description of the
/// first violation, or nullopt.
std::optional<std::string> coherence_violation(const PipelineResult& r);

struct FailureRecord {
  std::string question_id;
  Variant variant = Variant::Baseline;
  std::string stage;
  std::string error;
  std::string message;
};

struct BatchOutcome {
  std::vector<PipelineResult> results;  // dataset order
  std::vector<FailureRecord> failures;  // dataset order
};

/// Runs every question with up to cfg.max_parallel_questions in flight. A
/// failing question is recorded and never stops the batch.
BatchOutcome run_batch(const std::vector<StudentQuestion>& questions, StageContext& ctx, const Sources& sources);

nlohmann::json to_json(const PipelineResult& r);
PipelineResult pipeline_result_from_json(const nlohmann::json& j);
nlohmann::json timing_json(const PipelineResult& r);
nlohmann::json to_json(const FailureRecord& f);

}  // namespace conquer::pipeline
