#include "conquer/error.hpp"
#include "conquer/evaluation/evaluation.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer::evaluation {
namespace {

struct Judged {
  std::map<std::string, int> values;
  std::string raw;
};

// One ask plus one re-ask on unparseable output.
Judged ask_judge(JudgeContext& ctx, const std::string& prompt, const std::vector<std::string>& keys, int lo, int hi,
                 const std::string& what) {
  std::string last_error;
  for (int sample = 0; sample < 2; ++sample) {
    llm::ChatRequest req;
    req.model = ctx.model;
    req.user_prompt = prompt;
    req.temperature = ctx.temperature;
    req.max_output_tokens = ctx.max_output_tokens;
    req.sample = sample;
    auto reply = ctx.judge.chat(req);
    try {
      return {parse_judge_json(reply.text, keys, lo, hi), reply.text};
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(Errc::JudgeUnparseable, what + ": " + last_error);
}

std::vector<std::pair<std::string, std::string>> question_values(const StudentQuestion& q) {
  return {{"area", q.area}, {"level", std::string(level_display(q.level))}, {"question", q.text}};
}

}  // namespace

ScoredResult score_quiz_set(const StudentQuestion& q, const QuizSet& qs, JudgeContext& ctx) {
  auto values = question_values(q);
  values.emplace_back("quiz_set", pipeline::render_quiz_set(qs));
  const auto labels = dimension_labels();
  auto judged = ask_judge(ctx, text::render_template(ctx.prompts.judge, values), labels, 1, 5,
                          "scoring question '" + q.id + "'");
  std::array<int, kDimensionCount> scores{};
  for (std::size_t i = 0; i < kDimensionCount; ++i) scores[i] = judged.values.at(labels[i]);
  return {q.id, qs.variant, DimensionScores(scores), ctx.model, judged.raw};
}

PairVerdict compare_pairwise(const StudentQuestion& q, const QuizSet& first, const QuizSet& second,
                             PresentationOrder order, JudgeContext& ctx) {
  auto values = question_values(q);
  values.emplace_back("quiz_set_1", pipeline::render_quiz_set(first));
  values.emplace_back("quiz_set_2", pipeline::render_quiz_set(second));
  const auto labels = dimension_labels();
  auto judged = ask_judge(ctx, text::render_template(ctx.prompts.pairwise, values), labels, 1, 2,
                          "pairwise judgment for question '" + q.id + "'");
  PairVerdict v;
  v.order = order;
  for (std::size_t i = 0; i < kDimensionCount; ++i)
    v.choices[i] = judged.values.at(labels[i]) == 1 ? Choice::First : Choice::Second;
  return v;
}

DifficultyScore assess_difficulty(const StudentQuestion& q, JudgeContext& ctx) {
  auto judged = ask_judge(ctx, text::render_template(ctx.prompts.difficulty, question_values(q)), {"Difficulty"}, 1, 5,
                          "difficulty of question '" + q.id + "'");
  return {q.id, judged.values.at("Difficulty")};
}

nlohmann::json to_json(const ScoredResult& s) {
  return {{"question_id", s.question_id},
          {"variant", to_string(s.variant)},
          {"scores", json(s.scores)},
          {"judge_model", s.judge_model},
          {"judge_raw", s.judge_raw}};
}

ScoredResult scored_result_from_json(const nlohmann::json& j) {
  return {j.at("question_id").get<std::string>(), parse_variant(j.at("variant").get<std::string>()),
          j.at("scores").get<DimensionScores>(), j.at("judge_model").get<std::string>(),
          j.at("judge_raw").get<std::string>()};
}

nlohmann::json to_json(const DifficultyScore& d) { return {{"question_id", d.question_id}, {"score", d.score}}; }

nlohmann::json to_json(const VerdictRecord& v) {
  return {{"question_id", v.question_id},
          {"variant_a", to_string(v.variant_a)},
          {"variant_b", to_string(v.variant_b)},
          {"verdicts", json::array({json(v.verdicts.first), json(v.verdicts.second)})}};
}

VerdictRecord verdict_record_from_json(const nlohmann::json& j) {
  const auto& vs = j.at("verdicts");
  if (!vs.is_array() || vs.size() != 2) throw Error(Errc::OrderPairIncomplete, "verdicts must hold two entries");
  return {j.at("question_id").get<std::string>(), parse_variant(j.at("variant_a").get<std::string>()),
          parse_variant(j.at("variant_b").get<std::string>()), {vs[0].get<PairVerdict>(), vs[1].get<PairVerdict>()}};
}

}  // namespace conquer::evaluation
