#include <algorithm>
#include <cmath>
#include <numeric>

#include "conquer/error.hpp"
#include "conquer/evaluation/evaluation.hpp"

namespace conquer::evaluation {

WinRateRow pairwise_win_rate(const std::vector<VerdictPair>& verdicts, Side target) {
  if (verdicts.empty()) throw Error(Errc::EmptyInput, "no verdict pairs");
  std::array<std::size_t, kDimensionCount> a_hits{};
  for (std::size_t q = 0; q < verdicts.size(); ++q) {
    const auto& [v1, v2] = verdicts[q];
    if (v1.order == v2.order) throw Error(Errc::OrderPairIncomplete, "both verdicts use the same order", q);
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
      for (const auto* v : {&v1, &v2}) {
        const Choice a_choice = v->order == PresentationOrder::AFirst ? Choice::First : Choice::Second;
        if (v->choices[d] == a_choice) ++a_hits[d];
      }
    }
  }

  const std::size_t n = verdicts.size();
  const std::size_t total = 2 * n;
  WinRateRow row;
  row.n_questions = n;
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    const std::size_t hits = target == Side::A ? a_hits[d] : total - a_hits[d];
    // Computing the smaller share first and deriving the larger one as
    // 100 - small keeps A + B at exactly 100 in floating point.
    const std::size_t low = std::min(hits, total - hits);
    const double r_low = 50.0 * static_cast<double>(low) / static_cast<double>(n);
    row.rates[d] = hits == low ? r_low : 100.0 - r_low;
  }
  row.overall = std::accumulate(row.rates.begin(), row.rates.end(), 0.0) / kDimensionCount;
  return row;
}

double normalize_mean(double raw_mean, Normalization norm) {
  return norm == Normalization::Times20 ? raw_mean * 20.0 : (raw_mean - 1.0) / 4.0 * 100.0;
}

ReportRow aggregate_scores(const std::vector<ScoredResult>& results, Variant variant, Normalization norm) {
  std::array<long long, kDimensionCount> sums{};
  std::size_t n = 0;
  for (const auto& r : results) {
    if (r.variant != variant) continue;
    ++n;
    for (std::size_t d = 0; d < kDimensionCount; ++d) sums[d] += r.scores.values()[d];
  }
  if (n == 0) throw Error(Errc::EmptyInput, "no scored results for " + std::string(to_string(variant)));
  ReportRow row;
  row.variant = variant;
  row.n = n;
  for (std::size_t d = 0; d < kDimensionCount; ++d)
    row.dims[d] = normalize_mean(static_cast<double>(sums[d]) / static_cast<double>(n), norm);
  row.avg = std::accumulate(row.dims.begin(), row.dims.end(), 0.0) / kDimensionCount;
  return row;
}

double ablation_delta(double base_avg, double variant_avg) {
  if (!(base_avg > 0.0)) throw Error(Errc::InvalidValue, "ablation_delta: base average must be positive");
  return (variant_avg - base_avg) / base_avg * 100.0;
}

double ablation_delta(const ReportRow& base, const ReportRow& variant) { return ablation_delta(base.avg, variant.avg); }

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(Errc::DimensionMismatch, "pearson: series lengths differ");
  if (x.size() < 2) throw Error(Errc::InsufficientData, "pearson: need at least two samples");
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

CorrelationMatrix correlation_matrix(const std::vector<Sample>& samples, CorrelationMethod method) {
  if (samples.size() < 2) throw Error(Errc::InsufficientData, "correlation needs at least two samples");
  std::array<std::vector<double>, kDimensionCount> series;
  for (std::size_t d = 0; d < kDimensionCount; ++d) {
    series[d].reserve(samples.size());
    for (const auto& s : samples) series[d].push_back(s[d]);
    if (method == CorrelationMethod::Spearman) series[d] = ranks(series[d]);
  }
  CorrelationMatrix m;
  for (std::size_t i = 0; i < kDimensionCount; ++i) {
    for (std::size_t j = i; j < kDimensionCount; ++j) {
      auto r = pearson(series[i], series[j]);
      if (i == j && r) r = 1.0;
      m.values[i][j] = r;
      m.values[j][i] = r;
    }
  }
  return m;
}

CorrelationMatrix correlation_matrix(const std::vector<ScoredResult>& results, CorrelationMethod method) {
  std::vector<Sample> samples;
  samples.reserve(results.size());
  for (const auto& r : results) {
    Sample s{};
    for (std::size_t d = 0; d < kDimensionCount; ++d) s[d] = r.scores.values()[d];
    samples.push_back(s);
  }
  return correlation_matrix(samples, method);
}

std::vector<GroupMean> difficulty_means(const std::vector<StudentQuestion>& questions,
                                        const std::vector<DifficultyScore>& scores) {
  std::map<std::string, int> by_id;
  for (const auto& s : scores) by_id[s.question_id] = s.score;

  std::vector<GroupMean> areas;
  std::array<GroupMean, 3> levels;
  for (std::size_t l = 0; l < kLevels.size(); ++l) levels[l] = {"level", std::string(to_string(kLevels[l])), 0.0, 0};

  for (const auto& q : questions) {
    auto it = by_id.find(q.id);
    if (it == by_id.end()) continue;
    auto a = std::find_if(areas.begin(), areas.end(), [&](const GroupMean& g) { return g.group == q.area; });
    if (a == areas.end()) a = areas.insert(areas.end(), GroupMean{"area", q.area, 0.0, 0});
    a->mean += it->second;
    ++a->n;
    auto& lv = levels[static_cast<std::size_t>(q.level)];
    lv.mean += it->second;
    ++lv.n;
  }
  std::vector<GroupMean> out;
  for (auto& g : areas) {
    g.mean /= static_cast<double>(g.n);
    out.push_back(g);
  }
  for (auto& g : levels) {
    if (g.n == 0) continue;
    g.mean /= static_cast<double>(g.n);
    out.push_back(g);
  }
  return out;
}

}  // namespace conquer::evaluation
