#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "conquer/cli/cli.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"
#include "support.hpp"

using namespace conquer;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "conquer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string value_of(const std::string& out, const std::string& key) {
  auto pos = out.find(key + "=");
  if (pos == std::string::npos) return {};
  pos += key.size() + 1;
  return out.substr(pos, out.find_first_of(" \n", pos) - pos);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  return cells;
}

std::size_t line_count(const fs::path& p) {
  std::size_t n = 0;
  for (const auto& l : text::split_lines(read_file(p)))
    if (!l.empty()) ++n;
  return n;
}

// Each test runs in a fresh working directory; relative defaults land there.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    old_ = fs::current_path();
    fs::current_path(tmp_.path());
    unsetenv("CONQUER_CACHE_DIR");
  }
  void TearDown() override { fs::current_path(old_); }

  std::vector<std::string> mock(std::vector<std::string> args) {
    for (const char* a : {"--mock", "--seed", "7", "--corpus-dir", "fixtures"}) args.emplace_back(a);
    return args;
  }

  const std::string five_ = support::test_data("five_questions.jsonl").string();
  support::TempDir tmp_;
  fs::path old_;
};

}  // namespace

TEST_F(CliTest, BaselineRunWritesOneResultPerQuestion) {
  auto r = invoke(mock({"run", "--variant", "baseline", "--dataset", five_}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "succeeded"), "5");
  EXPECT_EQ(value_of(r.out, "failed"), "0");
  const fs::path dir = value_of(r.out, "run_dir");
  EXPECT_EQ(line_count(dir / "results.jsonl"), 5u);
  EXPECT_EQ(line_count(dir / "timings.jsonl"), 5u);
  EXPECT_EQ(line_count(dir / "failures.jsonl"), 0u);
  auto meta = nlohmann::json::parse(read_file(dir / "run.json"));
  EXPECT_EQ(meta["run_id"], value_of(r.out, "run_id"));
  EXPECT_EQ(value_of(r.out, "run_id").rfind("baseline-", 0), 0u);
  EXPECT_EQ(value_of(r.out, "run_id").size(), std::string("baseline-").size() + 12);
}

TEST_F(CliTest, RerunIsByteIdenticalAndHitsTheCache) {
  auto a = invoke(mock({"run", "--variant", "conquer", "--dataset", five_}));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto first = read_file(fs::path(value_of(a.out, "run_dir")) / "results.jsonl");
  auto b = invoke(mock({"run", "--variant", "conquer", "--dataset", five_}));
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(value_of(a.out, "run_id"), value_of(b.out, "run_id"));
  EXPECT_EQ(read_file(fs::path(value_of(b.out, "run_dir")) / "results.jsonl"), first);
  EXPECT_EQ(value_of(b.out, "cache_hit_rate"), "1.00");
  EXPECT_TRUE(fs::is_directory("cache/mock-seed-7"));
}

TEST_F(CliTest, OtherSeedGivesOtherRun) {
  auto a = invoke(mock({"run", "--variant", "baseline", "--dataset", five_}));
  auto args = mock({"run", "--variant", "baseline", "--dataset", five_});
  args[args.size() - 3] = "8";
  auto b = invoke(args);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(value_of(a.out, "run_id"), value_of(b.out, "run_id"));
}

TEST_F(CliTest, MissingApiKeyIsConfigError) {
  const char* saved = std::getenv("CONQUER_API_KEY");
  const std::string keep = saved ? saved : "";
  unsetenv("CONQUER_API_KEY");
  auto r = invoke({"run", "--variant", "baseline", "--dataset", five_});
  if (saved) setenv("CONQUER_API_KEY", keep.c_str(), 1);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("CONQUER_API_KEY"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"run", "--variant", "nonsense", "--mock"}).code, 2);
  EXPECT_EQ(invoke({"score"}).code, 2);  // --run is required
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
  auto missing = invoke(mock({"run", "--dataset", "no/such/file.jsonl"}));
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("NotFound"), std::string::npos);
}

TEST_F(CliTest, CompareRejectsDisjointRuns) {
  auto lines = text::split_lines(read_file(five_));
  write_file("first.jsonl", lines[0] + "\n" + lines[1] + "\n");
  write_file("second.jsonl", lines[2] + "\n" + lines[3] + "\n");
  auto a = invoke(mock({"run", "--variant", "baseline", "--dataset", "first.jsonl"}));
  auto b = invoke(mock({"run", "--variant", "conquer", "--dataset", "second.jsonl"}));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  auto c = invoke(mock({"compare", "--run-a", value_of(a.out, "run_dir"), "--run-b", value_of(b.out, "run_dir")}));
  EXPECT_EQ(c.code, 1);
  EXPECT_NE(c.err.find("QuestionSetMismatch"), std::string::npos);
  EXPECT_NE(c.err.find("biology-primary_school-1"), std::string::npos);
}

TEST_F(CliTest, ConQuerBeatsBaselinePairwise) {
  auto base = invoke(mock({"run", "--variant", "baseline", "--dataset", five_}));
  auto full = invoke(mock({"run", "--variant", "conquer", "--dataset", five_}));
  ASSERT_EQ(full.code, 0) << full.err;
  auto c = invoke(mock({"compare", "--run-a", value_of(full.out, "run_dir"), "--run-b", value_of(base.out, "run_dir")}));
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(value_of(c.out, "compared"), "5");
  EXPECT_EQ(value_of(c.out, "failed"), "0");
  const auto csv = text::split_lines(read_file("reports/report_winrate.csv"));
  ASSERT_GE(csv.size(), 3u);
  auto cells_a = split_csv(csv[1]);
  auto cells_b = split_csv(csv[2]);
  EXPECT_EQ(cells_a[0], "conquer");
  const double overall_a = std::stod(cells_a[7]), overall_b = std::stod(cells_b[7]);
  EXPECT_GT(overall_a, 50.0);
  EXPECT_NEAR(overall_a + overall_b, 100.0, 1e-9);
  EXPECT_EQ(line_count("reports/verdicts.jsonl"), 5u);
}

TEST_F(CliTest, ScoreThenReport) {
  auto r = invoke(mock({"run", "--variant", "conquer", "--dataset", five_}));
  const auto dir = value_of(r.out, "run_dir");
  auto s = invoke(mock({"score", "--run", dir}));
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(value_of(s.out, "scored"), "5");
  EXPECT_EQ(line_count(fs::path(dir) / "scores.jsonl"), 5u);
  auto rep = invoke({"report", "--run", dir});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_TRUE(fs::exists("reports/report_scores.csv"));
}

TEST_F(CliTest, AblationTableIsConsistent) {
  auto r = invoke(mock({"ablation", "--dataset", five_}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "soft_failures"), "0");
  const auto csv = text::split_lines(read_file("ablation/report_scores.csv"));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < csv.size(); ++i)
    if (!csv[i].empty()) rows.push_back(split_csv(csv[i]));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "conquer");
  EXPECT_EQ(rows[1][0], "no_concept_extraction");
  EXPECT_EQ(rows[2][0], "conceptnet_source");
  EXPECT_EQ(rows[3][0], "no_summary");
  EXPECT_EQ(rows[0][7], "---");
  const double base = std::stod(rows[0][6]);
  for (const auto& row : rows) {
    double sum = 0;
    for (int d = 1; d <= 5; ++d) sum += std::stod(row[static_cast<std::size_t>(d)]);
    EXPECT_NEAR(std::stod(row[6]), sum / 5.0, 0.01) << row[0];
  }
  for (std::size_t i = 1; i < 4; ++i)
    EXPECT_NEAR(std::stod(rows[i][7]), (std::stod(rows[i][6]) - base) / base * 100.0, 0.02) << rows[i][0];
  EXPECT_TRUE(fs::exists("ablation/report_correlation.csv"));
}

TEST_F(CliTest, DatasetGenerationAndDifficulty) {
  auto g = invoke(mock({"gen-dataset", "--area", "biology", "--level", "phd", "--per-cell", "4", "--out", "ds"}));
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(value_of(g.out, "questions"), "4");
  EXPECT_TRUE(fs::exists("ds/dataset.manifest.json"));
  EXPECT_EQ(invoke(mock({"gen-dataset", "--area", "astrology"})).code, 2);
  auto d = invoke(mock({"assess-difficulty", "--dataset", "ds/dataset.jsonl"}));
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(value_of(d.out, "assessed"), "4");
  EXPECT_TRUE(fs::exists("reports/report_difficulty.csv"));
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  write_file("cfg.json", R"({"variant": "no_summary", "top_k": 2, "cache_dir": "c2"})");
  auto r = invoke(mock({"run", "--config", "cfg.json", "--dataset", five_}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "variant"), "no_summary");
  EXPECT_TRUE(fs::is_directory("c2/mock-seed-7"));
  auto cfg = nlohmann::json::parse(read_file(fs::path(value_of(r.out, "run_dir")) / "config.json"));
  EXPECT_EQ(cfg["top_k"], 2);

  auto flag = invoke(mock({"run", "--config", "cfg.json", "--variant", "baseline", "--top-k", "4", "--dataset", five_}));
  ASSERT_EQ(flag.code, 0) << flag.err;
  EXPECT_EQ(value_of(flag.out, "variant"), "baseline");

  setenv("CONQUER_CACHE_DIR", "c3", 1);
  auto envr = invoke(mock({"run", "--config", "cfg.json", "--dataset", five_}));
  unsetenv("CONQUER_CACHE_DIR");
  ASSERT_EQ(envr.code, 0);
  EXPECT_TRUE(fs::is_directory("c3/mock-seed-7"));

  write_file("bad.json", R"({"variant": "conquer", "top_kk": 2})");
  EXPECT_EQ(invoke(mock({"run", "--config", "bad.json"})).code, 2);
  EXPECT_EQ(invoke(mock({"run", "--chunk-size", "50", "--chunk-overlap", "50"})).code, 2);
}

TEST(RunId, Shape) {
  RunConfig cfg;
  cfg.variant = Variant::NoSummary;
  auto id = cli::make_run_id(cfg, "abc", "mock-seed-7");
  EXPECT_EQ(id.rfind("no_summary-", 0), 0u);
  EXPECT_EQ(id.size(), std::string("no_summary-").size() + 12);
  EXPECT_EQ(id, cli::make_run_id(cfg, "abc", "mock-seed-7"));
  EXPECT_NE(id, cli::make_run_id(cfg, "abd", "mock-seed-7"));
}
