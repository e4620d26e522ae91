#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "conquer/pipeline/pipeline.hpp"
#include "conquer/serialization.hpp"

namespace conquer::pipeline {

StageError::StageError(std::string stage, std::string question_id, Errc cause, const std::string& detail)
    : Error(Errc::StageFailed, "stage '" + stage + "' failed for question '" + question_id + "': " + detail),
      stage_(std::move(stage)),
      question_id_(std::move(question_id)),
      cause_(cause) {}

namespace {

class StageRunner {
 public:
  StageRunner(const StudentQuestion& q, PipelineResult& r) : q_(q), r_(r) {}

  template <typename F>
  auto operator()(const char* stage, F&& fn) -> decltype(fn()) {
    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&] {
      std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
      r_.timing.push_back({stage, dt.count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record();
      } else {
        auto out = fn();
        record();
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, q_.id, e.code(), e.what());
    } catch (const std::exception& e) {
      throw StageError(stage, q_.id, Errc::StageFailed, e.what());
    }
  }

 private:
  const StudentQuestion& q_;
  PipelineResult& r_;
};

knowledge::DocumentSource& source_for(Variant v, const Sources& sources) {
  auto& src = v == Variant::ConceptNetSource ? sources.conceptnet : sources.wikipedia;
  if (!src) throw Error(Errc::ConfigError, std::string("no knowledge source configured for ") + std::string(to_string(v)));
  return *src;
}

}  // namespace

PipelineResult run_question(const StudentQuestion& q, StageContext& ctx, const Sources& sources) {
  const Variant variant = ctx.cfg.variant;
  PipelineResult r;
  r.question_id = q.id;
  r.variant = variant;
  StageRunner stage(q, r);

  stage("input", [&] { validate(q); });

  std::optional<std::string> context;
  if (variant != Variant::Baseline) {
    r.concepts = variant == Variant::NoConceptExtraction ? stage("concepts", [&] { return strip_stopwords(q); })
                                                         : stage("concepts", [&] { return extract_concepts(q, ctx); });
    r.retrieved = stage("retrieval", [&] {
      knowledge::RetrievalQuery query{
          q.text, *r.concepts,
          {ctx.cfg.chunk_size, ctx.cfg.chunk_overlap, ctx.cfg.top_k, ctx.cfg.per_concept_top_k}};
      return knowledge::retrieve(query, source_for(variant, sources), ctx.generator, ctx.cfg.embedding_model);
    });
    if (variant == Variant::NoSummary) {
      context = render_chunk_context(r.retrieved);
    } else {
      r.summary = stage("summary", [&] { return summarize(r.retrieved, q, ctx); });
      context = r.summary->text;
    }
  }

  r.generator_prompt = render_generation_prompt(q, context, variant, ctx.prompts);
  r.raw_generator_output = stage("generation", [&] { return generate_quizzes(q, context, variant, ctx); });
  try {
    r.quiz_set = parse_quiz_output(r.raw_generator_output, q.id, variant);
  } catch (const Error&) {
    r.generation_attempts = 2;
    r.raw_generator_output = stage("generation", [&] { return generate_quizzes(q, context, variant, ctx, 1); });
    r.quiz_set = stage("parse", [&] { return parse_quiz_output(r.raw_generator_output, q.id, variant); });
  }
  return r;
}

std::optional<std::string> coherence_violation(const PipelineResult& r) {
  if (r.quiz_set.question_id != r.question_id) return "quiz_set.question_id differs from question_id";
  if (r.quiz_set.variant != r.variant) return "quiz_set.variant differs from variant";
  if (r.quiz_set.quizzes.size() != kQuizzesPerSet) return "quiz set does not hold three quizzes";
  switch (r.variant) {
    case Variant::Baseline:
      if (r.concepts || !r.retrieved.empty() || r.summary) return "baseline result carries concepts, chunks or a summary";
      break;
    case Variant::NoSummary:
      if (r.summary) return "no_summary result carries a summary";
      if (r.retrieved.empty()) return "no_summary result has no retrieved chunks";
      break;
    case Variant::NoConceptExtraction:
      if (!r.concepts || r.concepts->origin != ConceptOrigin::StopwordStripped)
        return "no_concept_extraction result lacks stopword-stripped concepts";
      [[fallthrough]];
    case Variant::ConQuer:
    case Variant::ConceptNetSource:
      if (!r.concepts || r.retrieved.empty() || !r.summary) return "grounded result lacks concepts, chunks or summary";
      if (r.variant != Variant::NoConceptExtraction && r.concepts->origin != ConceptOrigin::LlmExtracted)
        return "concepts should be model-extracted";
      break;
  }
  return std::nullopt;
}

BatchOutcome run_batch(const std::vector<StudentQuestion>& questions, StageContext& ctx, const Sources& sources) {
  std::vector<std::optional<PipelineResult>> results(questions.size());
  std::vector<std::optional<FailureRecord>> failures(questions.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < questions.size(); i = next++) {
      try {
        results[i] = run_question(questions[i], ctx, sources);
      } catch (const StageError& e) {
        failures[i] = FailureRecord{questions[i].id, ctx.cfg.variant, e.stage(), std::string(errc_name(e.cause())),
                                    e.what()};
      } catch (const std::exception& e) {
        failures[i] = FailureRecord{questions[i].id, ctx.cfg.variant, "unknown", "StageFailed", e.what()};
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(ctx.cfg.max_parallel_questions, questions.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BatchOutcome out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (results[i]) out.results.push_back(std::move(*results[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  return out;
}

nlohmann::json to_json(const PipelineResult& r) {
  json j;
  j["question_id"] = r.question_id;
  j["variant"] = to_string(r.variant);
  j["concepts"] = r.concepts ? json(*r.concepts) : json(nullptr);
  j["retrieved"] = r.retrieved;
  j["summary"] = r.summary ? json(*r.summary) : json(nullptr);
  j["quiz_set"] = r.quiz_set;
  j["raw_generator_output"] = r.raw_generator_output;
  j["generator_prompt"] = r.generator_prompt;
  j["generation_attempts"] = r.generation_attempts;
  return j;
}

PipelineResult pipeline_result_from_json(const nlohmann::json& j) {
  PipelineResult r;
  r.question_id = j.at("question_id").get<std::string>();
  r.variant = parse_variant(j.at("variant").get<std::string>());
  if (!j.at("concepts").is_null()) r.concepts = j.at("concepts").get<ConceptSet>();
  r.retrieved = j.at("retrieved").get<std::vector<KnowledgeChunk>>();
  if (!j.at("summary").is_null()) r.summary = j.at("summary").get<Summary>();
  r.quiz_set = j.at("quiz_set").get<QuizSet>();
  r.raw_generator_output = j.at("raw_generator_output").get<std::string>();
  r.generator_prompt = j.value("generator_prompt", std::string{});
  r.generation_attempts = j.value("generation_attempts", 1);
  return r;
}

nlohmann::json timing_json(const PipelineResult& r) {
  json stages = json::object();
  for (const auto& t : r.timing) stages[t.stage] = stages.value(t.stage, 0.0) + t.ms;
  return {{"question_id", r.question_id}, {"variant", to_string(r.variant)}, {"ms", stages}};
}

nlohmann::json to_json(const FailureRecord& f) {
  return {{"question_id", f.question_id},
          {"variant", to_string(f.variant)},
          {"stage", f.stage},
          {"error", f.error},
          {"message", f.message}};
}

}  // namespace conquer::pipeline
