#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "conquer/domain.hpp"
#include "conquer/llm/gateway.hpp"
#include "conquer/pipeline/pipeline.hpp"

namespace conquer::evaluation {

/// Extracts the judge's answer object. Looks at the last ```json (or
/// '''json) fenced block; with no fence, at the last balanced {...} in the
/// text. The object must hold exactly `expected_keys`, each an integer in
/// [lo, hi]. Errors: NoJsonFound, MissingKey, UnexpectedKey, ValueOutOfDomain.
std::map<std::string, int> parse_judge_json(const std::string& raw, const std::vector<std::string>& expected_keys,
                                            int lo, int hi);

/// The five judge labels, in dimension order.
std::vector<std::string> dimension_labels();

struct JudgeContext {
  llm::Gateway& judge;
  const pipeline::PromptLibrary& prompts;
  std::string model;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

struct ScoredResult {
  std::string question_id;
  Variant variant = Variant::Baseline;
  DimensionScores scores;
  std::string judge_model;
  std::string judge_raw;

  bool operator==(const ScoredResult&) const = default;
};

/// Errors: JudgeUnparseable after one re-ask; gateway errors propagate.
ScoredResult score_quiz_set(const StudentQuestion& q, const QuizSet& qs, JudgeContext& ctx);

/// Judges `first` against `second` in that presentation order; `order`
/// records which of the caller's variants was shown first.
PairVerdict compare_pairwise(const StudentQuestion& q, const QuizSet& first, const QuizSet& second,
                             PresentationOrder order, JudgeContext& ctx);

/// Both orders for one question, in either position. The orders are checked
/// when the win rate is computed.
using VerdictPair = std::pair<PairVerdict, PairVerdict>;

enum class Side { A, B };

struct WinRateRow {
  std::array<double, kDimensionCount> rates{};
  double overall = 0.0;
  std::size_t n_questions = 0;
};

/// Per question and dimension the target side earns 1 if chosen in both
/// orders, 0.5 if in one, 0 if in neither; rates are mean credit x 100.
/// winrate(A) + winrate(B) is exactly 100 per dimension.
/// Errors: EmptyInput, OrderPairIncomplete (index = question position).
WinRateRow pairwise_win_rate(const std::vector<VerdictPair>& verdicts, Side target);

struct ReportRow {
  Variant variant = Variant::Baseline;
  std::array<double, kDimensionCount> dims{};
  double avg = 0.0;
  std::size_t n = 0;
};

/// Mean raw score per dimension mapped to the 100-point scale (x20 by
/// default, (s-1)/4*100 with Normalization::Affine). Only results of
/// `variant` are used. Errors: EmptyInput.
ReportRow aggregate_scores(const std::vector<ScoredResult>& results, Variant variant,
                           Normalization norm = Normalization::Times20);

double normalize_mean(double raw_mean, Normalization norm);

/// (variant.avg - base.avg) / base.avg * 100. Precondition base.avg > 0.
double ablation_delta(const ReportRow& base, const ReportRow& variant);
double ablation_delta(double base_avg, double variant_avg);

/// Entries are nullopt where either series has zero variance.
struct CorrelationMatrix {
  std::array<std::array<std::optional<double>, kDimensionCount>, kDimensionCount> values{};
};

using Sample = std::array<double, kDimensionCount>;

/// Errors: InsufficientData (fewer than two samples).
CorrelationMatrix correlation_matrix(const std::vector<Sample>& samples,
                                     CorrelationMethod method = CorrelationMethod::Pearson);
CorrelationMatrix correlation_matrix(const std::vector<ScoredResult>& results,
                                     CorrelationMethod method = CorrelationMethod::Pearson);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);
/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> ranks(const std::vector<double>& x);

struct DifficultyScore {
  std::string question_id;
  int score = 1;

  bool operator==(const DifficultyScore&) const = default;
};

/// Errors: JudgeUnparseable after one re-ask.
DifficultyScore assess_difficulty(const StudentQuestion& q, JudgeContext& ctx);

struct GroupMean {
  std::string group_kind;  // "area" or "level"
  std::string group;
  double mean = 0.0;
  std::size_t n = 0;
};

/// Means grouped by area (first-appearance order) then by level (level
/// order). Scores are matched to questions by id; unmatched ids are ignored.
std::vector<GroupMean> difficulty_means(const std::vector<StudentQuestion>& questions,
                                        const std::vector<DifficultyScore>& scores);

// Persistence.
nlohmann::json to_json(const ScoredResult& s);
ScoredResult scored_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DifficultyScore& d);

struct VerdictRecord {
  std::string question_id;
  Variant variant_a = Variant::Baseline;
  Variant variant_b = Variant::Baseline;
  VerdictPair verdicts;
};
nlohmann::json to_json(const VerdictRecord& v);
VerdictRecord verdict_record_from_json(const nlohmann::json& j);

// CSV reports.
struct ScoresTableRow {
  ReportRow row;
  std::optional<double> delta_pct;  // nullopt for the base row
};
std::string scores_csv(const std::vector<ScoresTableRow>& rows);
struct WinRateTableRow {
  Variant a = Variant::Baseline;
  Variant b = Variant::Baseline;
  WinRateRow row;
};
std::string winrate_csv(const std::vector<WinRateTableRow>& rows);
std::string correlation_csv(const CorrelationMatrix& m);
std::string difficulty_csv(const std::vector<GroupMean>& means);

}  // namespace conquer::evaluation
