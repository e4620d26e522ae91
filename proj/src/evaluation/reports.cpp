#include "conquer/evaluation/evaluation.hpp"
#include "conquer/text.hpp"

namespace conquer::evaluation {
namespace {

std::string dimension_header() {
  std::string h;
  for (auto d : kDimensions) h += "," + std::string(dimension_key(d));
  return h;
}

std::string fixed2(double v) { return text::format_fixed(v, 2); }

}  // namespace

std::string scores_csv(const std::vector<ScoresTableRow>& rows) {
  std::string out = "variant" + dimension_header() + ",avg,delta_pct\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.row.variant));
    for (double v : r.row.dims) out += "," + fixed2(v);
    out += "," + fixed2(r.row.avg) + "," + (r.delta_pct ? fixed2(*r.delta_pct) : std::string("---")) + "\n";
  }
  return out;
}

std::string winrate_csv(const std::vector<WinRateTableRow>& rows) {
  std::string out = "variant_a,variant_b" + dimension_header() + ",overall,n_questions\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.a)) + "," + std::string(to_string(r.b));
    for (double v : r.row.rates) out += "," + fixed2(v);
    out += "," + fixed2(r.row.overall) + "," + std::to_string(r.row.n_questions) + "\n";
  }
  return out;
}

std::string correlation_csv(const CorrelationMatrix& m) {
  std::string out = "dimension" + dimension_header() + "\n";
  for (std::size_t i = 0; i < kDimensionCount; ++i) {
    out += std::string(dimension_key(kDimensions[i]));
    for (const auto& v : m.values[i]) out += "," + (v ? text::format_fixed(*v, 4) : std::string("NA"));
    out += "\n";
  }
  return out;
}

std::string difficulty_csv(const std::vector<GroupMean>& means) {
  std::string out = "group_kind,group,mean_difficulty,n\n";
  for (const auto& g : means) {
    // area labels may contain commas in custom catalogs
    const bool quote = g.group.find(',') != std::string::npos;
    out += g.group_kind + "," + (quote ? "\"" + g.group + "\"" : g.group) + "," + fixed2(g.mean) + "," +
           std::to_string(g.n) + "\n";
  }
  return out;
}

}  // namespace conquer::evaluation
