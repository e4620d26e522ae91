#include <atomic>
#include <cstdlib>
#include <ctime>
#include <map>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "conquer/cli/cli.hpp"
#include "conquer/dataset/dataset.hpp"
#include "conquer/error.hpp"
#include "conquer/evaluation/evaluation.hpp"
#include "conquer/knowledge/knowledge.hpp"
#include "conquer/llm/gateway.hpp"
#include "conquer/llm/mock_backend.hpp"
#include "conquer/llm/openai_backend.hpp"
#include "conquer/pipeline/pipeline.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultApiBase = "https://api.openai.com/v1";
constexpr const char* kDefaultDataset = "data/reference/dataset.jsonl";
constexpr std::array<Variant, 4> kAblationVariants = {Variant::ConQuer, Variant::NoConceptExtraction,
                                                      Variant::ConceptNetSource, Variant::NoSummary};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

// Flags shared by every subcommand; which ones were given is read back
// from the parsed subcommand.
struct Common {
  std::string config_path;
  std::string variant;
  std::string dataset;
  bool mock = false;
  std::uint64_t seed = 0;
  std::string corpus_dir;
  std::string out;
  std::size_t top_k = 0;
  std::size_t chunk_size = 0;
  std::size_t chunk_overlap = 0;
  std::size_t max_parallel = 0;
  std::string run_id;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON config file with RunConfig fields");
  sub->add_option("--variant", c.variant, "baseline|conquer|no_concept_extraction|conceptnet_source|no_summary");
  sub->add_option("--dataset", c.dataset, "questions JSONL");
  sub->add_flag("--mock", c.mock, "use the deterministic offline backend");
  sub->add_option("--seed", c.seed, "mock seed");
  sub->add_option("--corpus-dir", c.corpus_dir, "read knowledge documents from a local directory");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--top-k", c.top_k);
  sub->add_option("--chunk-size", c.chunk_size);
  sub->add_option("--chunk-overlap", c.chunk_overlap);
  sub->add_option("--max-parallel", c.max_parallel, "questions in flight");
  sub->add_option("--run-id", c.run_id, "override the generated run id");
}

RunConfig resolve_config(const CLI::App& sub, const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) {
    if (!fs::exists(c.config_path)) throw Error(Errc::ConfigError, "config file " + c.config_path + " not found");
    auto j = json::parse(read_file(c.config_path), nullptr, false);
    if (j.is_discarded()) throw Error(Errc::ConfigError, "config file " + c.config_path + " is not valid JSON");
    from_json(j, cfg);
  }
  if (auto v = env("CONQUER_CACHE_DIR")) cfg.cache_dir = *v;
  if (auto v = env("CONQUER_GENERATOR_MODEL")) cfg.generator_model = *v;
  if (auto v = env("CONQUER_JUDGE_MODEL")) cfg.judge_model = *v;
  if (auto v = env("CONQUER_EMBEDDING_MODEL")) cfg.embedding_model = *v;

  if (sub.count("--variant")) {
    try {
      cfg.variant = parse_variant(c.variant);
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, e.what());
    }
  }
  if (c.mock) cfg.mock = true;
  if (sub.count("--seed")) cfg.seed = c.seed;
  if (sub.count("--corpus-dir")) cfg.corpus_dir = c.corpus_dir;
  if (sub.count("--top-k")) cfg.top_k = c.top_k;
  if (sub.count("--chunk-size")) cfg.chunk_size = c.chunk_size;
  if (sub.count("--chunk-overlap")) cfg.chunk_overlap = c.chunk_overlap;
  if (sub.count("--max-parallel")) cfg.max_parallel_questions = c.max_parallel;
  validate(cfg);
  return cfg;
}

struct Services {
  RunConfig cfg;
  pipeline::PromptLibrary prompts;
  std::unique_ptr<llm::Gateway> generator;
  std::unique_ptr<llm::Gateway> judge;
  pipeline::Sources sources;

  llm::GatewayStats stats() const {
    llm::GatewayStats s;
    for (const auto* g : {generator.get(), judge.get()}) {
      if (!g) continue;
      auto t = g->stats();
      s.cache_hits += t.cache_hits;
      s.cache_misses += t.cache_misses;
      s.provider_attempts += t.provider_attempts;
    }
    return s;
  }
};

enum Need : unsigned { kGenerator = 1, kJudge = 2 };

Services make_services(const RunConfig& cfg, unsigned need) {
  Services s;
  s.cfg = cfg;
  s.prompts = pipeline::PromptLibrary::load(cfg.prompts_dir);

  llm::GatewayOptions opts;
  opts.retry.max_attempts = cfg.max_attempts;
  opts.requests_per_minute = cfg.requests_per_minute;
  // Mock answers depend on the seed, which is not part of the request
  // digest, so each seed gets its own cache namespace.
  opts.cache_dir = cfg.mock ? fs::path(cfg.cache_dir) / ("mock-seed-" + std::to_string(cfg.seed)) : fs::path(cfg.cache_dir);

  if (cfg.mock) {
    auto backend = std::make_shared<llm::MockBackend>(cfg.seed);
    if (need & kGenerator) s.generator = std::make_unique<llm::Gateway>(backend, opts);
    if (need & kJudge) s.judge = std::make_unique<llm::Gateway>(backend, opts);
  } else {
    auto key = env("CONQUER_API_KEY");
    auto base = env("CONQUER_API_BASE").value_or(kDefaultApiBase);
    if (need & kGenerator) {
      if (!key) throw Error(Errc::ConfigError, "CONQUER_API_KEY is not set (export it, or pass --mock for offline runs)");
      s.generator = std::make_unique<llm::Gateway>(std::make_shared<llm::OpenAiBackend>(base, *key), opts);
    }
    if (need & kJudge) {
      auto jkey = env("CONQUER_JUDGE_API_KEY");
      if (!jkey) jkey = key;
      if (!jkey)
        throw Error(Errc::ConfigError,
                    "CONQUER_API_KEY is not set (nor CONQUER_JUDGE_API_KEY; export one, or pass --mock)");
      auto jbase = env("CONQUER_JUDGE_API_BASE").value_or(base);
      s.judge = std::make_unique<llm::Gateway>(std::make_shared<llm::OpenAiBackend>(jbase, *jkey), opts);
    }
  }

  if (!cfg.corpus_dir.empty()) {
    const auto dir = pipeline::resolve_resource(cfg.corpus_dir);
    if (!fs::is_directory(dir)) throw Error(Errc::ConfigError, "corpus dir " + cfg.corpus_dir + " not found");
    s.sources.wikipedia = std::make_shared<knowledge::FixtureSource>(dir, KnowledgeSource::Wikipedia);
    s.sources.conceptnet = std::make_shared<knowledge::FixtureSource>(dir, KnowledgeSource::ConceptNet);
  } else {
    s.sources.wikipedia = std::make_shared<knowledge::WikipediaSource>(
        env("CONQUER_WIKIPEDIA_BASE").value_or("https://en.wikipedia.org"), fs::path(cfg.cache_dir) / "documents");
    s.sources.conceptnet =
        std::make_shared<knowledge::ConceptNetSource>(env("CONQUER_CONCEPTNET_BASE").value_or("http://api.conceptnet.io"));
  }
  return s;
}

evaluation::JudgeContext judge_context(Services& s) {
  return {*s.judge, s.prompts, s.cfg.judge_model, s.cfg.judge_temperature, s.cfg.max_output_tokens};
}

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(workers, n); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

json failure_json(const std::string& question_id, const std::exception& e) {
  const auto* ce = dynamic_cast<const Error*>(&e);
  return {{"question_id", question_id},
          {"error", ce ? std::string(errc_name(ce->code())) : std::string("Error")},
          {"message", e.what()}};
}

std::string dataset_path_or_default(const Common& c) { return c.dataset.empty() ? kDefaultDataset : c.dataset; }

dataset::QuestionDataset load_questions(const std::string& path) {
  return dataset::load_dataset(pipeline::resolve_resource(path));
}

std::map<std::string, StudentQuestion> by_id(const dataset::QuestionDataset& ds) {
  std::map<std::string, StudentQuestion> m;
  for (const auto& q : ds.questions) m.emplace(q.id, q);
  return m;
}

const StudentQuestion& lookup(const std::map<std::string, StudentQuestion>& qs, const std::string& id) {
  auto it = qs.find(id);
  if (it == qs.end()) throw Error(Errc::QuestionSetMismatch, "question '" + id + "' is not in the dataset");
  return it->second;
}

std::vector<pipeline::PipelineResult> load_results(const fs::path& run_dir) {
  std::vector<pipeline::PipelineResult> out;
  read_jsonl(run_dir / "results.jsonl", [&](const json& j, std::size_t line) {
    try {
      out.push_back(pipeline::pipeline_result_from_json(j));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(Errc::SchemaViolation, (run_dir / "results.jsonl").string() + ": " + e.what(), line);
    }
  });
  return out;
}

std::vector<evaluation::ScoredResult> load_scores(const fs::path& run_dir) {
  std::vector<evaluation::ScoredResult> out;
  read_jsonl(run_dir / "scores.jsonl", [&](const json& j, std::size_t) {
    out.push_back(evaluation::scored_result_from_json(j));
  });
  return out;
}

// Dataset recorded by `run`, for commands that get only a run directory.
std::string run_dataset(const fs::path& run_dir, const Common& c) {
  if (!c.dataset.empty()) return c.dataset;
  const auto meta = run_dir / "run.json";
  if (fs::exists(meta)) {
    auto j = json::parse(read_file(meta), nullptr, false);
    if (!j.is_discarded() && j.contains("dataset")) return j["dataset"].get<std::string>();
  }
  return kDefaultDataset;
}

void require_dir(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) throw Error(Errc::NotFound, std::string(what) + " " + dir.string() + " does not exist");
}

struct RunOutcome {
  fs::path dir;
  std::string run_id;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

RunOutcome execute_run(Services& s, const dataset::QuestionDataset& ds, const std::string& dataset_arg,
                       const fs::path& out_root, const std::string& run_id_override, std::ostream& out) {
  const std::string digest = llm::sha256_hex(read_file(pipeline::resolve_resource(dataset_arg)));
  const std::string stamp = s.cfg.mock ? "mock-seed-" + std::to_string(s.cfg.seed) : utc_now();
  RunOutcome o;
  o.run_id = run_id_override.empty() ? make_run_id(s.cfg, digest, stamp) : run_id_override;
  o.dir = out_root / o.run_id;
  fs::create_directories(o.dir);

  pipeline::StageContext ctx{*s.generator, s.prompts, s.cfg};
  auto batch = pipeline::run_batch(ds.questions, ctx, s.sources);
  o.succeeded = batch.results.size();
  o.failed = batch.failures.size();

  std::vector<json> results, failures, timings;
  for (const auto& r : batch.results) {
    results.push_back(pipeline::to_json(r));
    timings.push_back(pipeline::timing_json(r));
  }
  for (const auto& f : batch.failures) failures.push_back(pipeline::to_json(f));
  write_file(o.dir / "config.json", json(s.cfg).dump(2) + "\n");
  write_file(o.dir / "run.json", json{{"run_id", o.run_id},
                                      {"variant", to_string(s.cfg.variant)},
                                      {"dataset", dataset_arg},
                                      {"dataset_sha256", digest},
                                      {"questions", ds.questions.size()},
                                      {"succeeded", o.succeeded},
                                      {"failed", o.failed}}
                                         .dump(2) +
                                     "\n");
  write_jsonl(o.dir / "results.jsonl", results);
  write_jsonl(o.dir / "failures.jsonl", failures);
  write_jsonl(o.dir / "timings.jsonl", timings);

  out << "run_id=" << o.run_id << " variant=" << to_string(s.cfg.variant) << "\n"
      << "questions=" << ds.questions.size() << " succeeded=" << o.succeeded << " failed=" << o.failed
      << " cache_hit_rate=" << text::format_fixed(s.stats().hit_rate(), 2) << "\n";
  for (const auto& f : batch.failures) out << "  failed " << f.question_id << " [" << f.stage << "] " << f.error << "\n";
  out << "run_dir=" << o.dir.string() << "\n";
  return o;
}

struct ScoreOutcome {
  std::vector<evaluation::ScoredResult> scores;
  std::size_t failed = 0;
};

ScoreOutcome score_run(Services& s, const fs::path& run_dir, const std::map<std::string, StudentQuestion>& questions) {
  const auto results = load_results(run_dir);
  std::vector<std::optional<evaluation::ScoredResult>> scored(results.size());
  std::vector<std::optional<json>> failed(results.size());
  auto jctx = judge_context(s);
  parallel_for(results.size(), s.cfg.max_parallel_questions, [&](std::size_t i) {
    try {
      scored[i] = evaluation::score_quiz_set(lookup(questions, results[i].question_id), results[i].quiz_set, jctx);
    } catch (const std::exception& e) {
      failed[i] = failure_json(results[i].question_id, e);
    }
  });
  ScoreOutcome o;
  std::vector<json> lines, failures;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (scored[i]) {
      lines.push_back(evaluation::to_json(*scored[i]));
      o.scores.push_back(std::move(*scored[i]));
    }
    if (failed[i]) failures.push_back(std::move(*failed[i]));
  }
  o.failed = failures.size();
  write_jsonl(run_dir / "scores.jsonl", lines);
  write_jsonl(run_dir / "score_failures.jsonl", failures);
  return o;
}

Variant run_variant(const fs::path& run_dir) {
  auto j = json::parse(read_file(run_dir / "config.json"), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::SchemaViolation, (run_dir / "config.json").string() + " is not JSON");
  RunConfig cfg;
  from_json(j, cfg);
  return cfg.variant;
}

void print_row(std::ostream& out, const evaluation::ReportRow& row, std::optional<double> delta) {
  out << to_string(row.variant);
  for (double v : row.dims) out << " " << text::format_fixed(v, 2);
  out << " avg=" << text::format_fixed(row.avg, 2);
  if (delta) out << " delta=" << text::format_fixed(*delta, 2) << "%";
  out << " n=" << row.n << "\n";
}

// ---- commands

int cmd_gen_dataset(const CLI::App& sub, const Common& c, const std::vector<std::string>& areas_arg,
                    const std::vector<std::string>& levels_arg, std::size_t per_cell, std::ostream& out) {
  auto cfg = resolve_config(sub, c);
  auto catalog = AreaCatalog::load(pipeline::resolve_resource(cfg.areas_path));
  dataset::GenerationParams p;
  p.areas = areas_arg.empty() ? catalog.areas() : areas_arg;
  for (const auto& a : p.areas)
    if (!catalog.contains(a)) throw Error(Errc::ConfigError, "unknown area '" + a + "' (see " + cfg.areas_path + ")");
  if (levels_arg.empty()) p.levels.assign(kLevels.begin(), kLevels.end());
  for (const auto& l : levels_arg) {
    try {
      p.levels.push_back(parse_level(l));
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, e.what());
    }
  }
  if (per_cell == 0) throw Error(Errc::ConfigError, "--per-cell must be >= 1");
  p.per_cell = per_cell;
  p.model = cfg.generator_model;
  p.temperature = cfg.generation_temperature;
  p.max_output_tokens = cfg.max_output_tokens;
  p.created_at = cfg.mock ? "1970-01-01T00:00:00Z" : utc_now();

  auto s = make_services(cfg, kGenerator);
  auto ds = dataset::generate_question_set(p, *s.generator, s.prompts);
  const fs::path dir = c.out.empty() ? fs::path("data/generated") : fs::path(c.out);
  fs::create_directories(dir);
  dataset::save_dataset(ds, dir / "dataset.jsonl");
  out << "questions=" << ds.questions.size() << " cells=" << p.areas.size() * p.levels.size() << "\n"
      << "dataset=" << (dir / "dataset.jsonl").string() << "\n";
  return 0;
}

int cmd_run(const CLI::App& sub, const Common& c, std::ostream& out) {
  auto cfg = resolve_config(sub, c);
  auto s = make_services(cfg, kGenerator);
  const auto dataset_arg = dataset_path_or_default(c);
  auto ds = load_questions(dataset_arg);
  execute_run(s, ds, dataset_arg, c.out.empty() ? fs::path("runs") : fs::path(c.out), c.run_id, out);
  return 0;
}

int cmd_score(const CLI::App& sub, const Common& c, const std::string& run_dir, std::ostream& out) {
  auto cfg = resolve_config(sub, c);
  auto s = make_services(cfg, kJudge);
  require_dir(run_dir, "run");
  auto ds = load_questions(run_dataset(run_dir, c));
  auto scored = score_run(s, run_dir, by_id(ds));
  out << "scored=" << scored.scores.size() << " failed=" << scored.failed
      << " cache_hit_rate=" << text::format_fixed(s.stats().hit_rate(), 2) << "\n";
  if (!scored.scores.empty())
    print_row(out, evaluation::aggregate_scores(scored.scores, run_variant(run_dir), cfg.normalization), std::nullopt);
  out << "scores=" << (fs::path(run_dir) / "scores.jsonl").string() << "\n";
  return 0;
}

int cmd_compare(const CLI::App& sub, const Common& c, const std::string& run_a, const std::string& run_b,
                std::ostream& out) {
  auto cfg = resolve_config(sub, c);
  auto s = make_services(cfg, kJudge);
  require_dir(run_a, "run");
  require_dir(run_b, "run");
  auto ds = load_questions(run_dataset(run_a, c));
  const auto questions = by_id(ds);
  const auto ra = load_results(run_a);
  const auto rb = load_results(run_b);
  const Variant va = run_variant(run_a), vb = run_variant(run_b);

  std::map<std::string, const QuizSet*> b_sets;
  for (const auto& r : rb) b_sets[r.question_id] = &r.quiz_set;
  std::set<std::string> a_ids;
  for (const auto& r : ra) a_ids.insert(r.question_id);
  std::vector<std::string> only_a, only_b;
  for (const auto& id : a_ids)
    if (!b_sets.count(id)) only_a.push_back(id);
  for (const auto& [id, _] : b_sets)
    if (!a_ids.count(id)) only_b.push_back(id);
  if (!only_a.empty() || !only_b.empty()) {
    auto join = [](const std::vector<std::string>& v) {
      std::string o;
      for (const auto& x : v) o += (o.empty() ? "" : ",") + x;
      return o.empty() ? std::string("-") : o;
    };
    throw Error(Errc::QuestionSetMismatch, "runs cover different questions; only in A: " + join(only_a) +
                                               "; only in B: " + join(only_b));
  }

  auto jctx = judge_context(s);
  std::vector<std::optional<evaluation::VerdictRecord>> records(ra.size());
  std::vector<std::optional<json>> failed(ra.size());
  parallel_for(ra.size(), cfg.max_parallel_questions, [&](std::size_t i) {
    const auto& id = ra[i].question_id;
    try {
      const auto& q = lookup(questions, id);
      const QuizSet& a = ra[i].quiz_set;
      const QuizSet& b = *b_sets.at(id);
      auto v1 = evaluation::compare_pairwise(q, a, b, PresentationOrder::AFirst, jctx);
      auto v2 = evaluation::compare_pairwise(q, b, a, PresentationOrder::BFirst, jctx);
      records[i] = evaluation::VerdictRecord{id, va, vb, {v1, v2}};
    } catch (const std::exception& e) {
      failed[i] = failure_json(id, e);
    }
  });

  std::vector<json> lines, failures;
  std::vector<evaluation::VerdictPair> pairs;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (records[i]) {
      lines.push_back(evaluation::to_json(*records[i]));
      pairs.push_back(records[i]->verdicts);
    }
    if (failed[i]) failures.push_back(std::move(*failed[i]));
  }
  const fs::path dir = c.out.empty() ? fs::path("reports") : fs::path(c.out);
  fs::create_directories(dir);
  write_jsonl(dir / "verdicts.jsonl", lines);
  write_jsonl(dir / "compare_failures.jsonl", failures);

  std::vector<evaluation::WinRateTableRow> table = {
      {va, vb, evaluation::pairwise_win_rate(pairs, evaluation::Side::A)},
      {vb, va, evaluation::pairwise_win_rate(pairs, evaluation::Side::B)}};
  write_file(dir / "report_winrate.csv", evaluation::winrate_csv(table));
  out << "compared=" << pairs.size() << " failed=" << failures.size() << "\n";
  for (const auto& t : table)
    out << to_string(t.a) << " vs " << to_string(t.b) << ": overall=" << text::format_fixed(t.row.overall, 2) << "\n";
  out << "report=" << (dir / "report_winrate.csv").string() << "\n";
  return 0;
}

void write_score_reports(const fs::path& dir, const std::vector<evaluation::ReportRow>& rows,
                         const std::vector<evaluation::ScoredResult>& base_scores, const RunConfig& cfg,
                         std::ostream& out, std::ostream& err) {
  std::vector<evaluation::ScoresTableRow> table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::optional<double> delta;
    if (i > 0) delta = evaluation::ablation_delta(rows[0], rows[i]);
    table.push_back({rows[i], delta});
    print_row(out, rows[i], delta);
  }
  write_file(dir / "report_scores.csv", evaluation::scores_csv(table));
  try {
    write_file(dir / "report_correlation.csv",
               evaluation::correlation_csv(evaluation::correlation_matrix(base_scores, cfg.correlation)));
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientData) throw;
    err << "warning: no correlation report: " << e.what() << "\n";
  }
  out << "report=" << (dir / "report_scores.csv").string() << "\n";
}

int cmd_ablation(const CLI::App& sub, const Common& c, std::ostream& out, std::ostream& err) {
  auto cfg = resolve_config(sub, c);
  auto s = make_services(cfg, kGenerator | kJudge);
  const auto dataset_arg = dataset_path_or_default(c);
  auto ds = load_questions(dataset_arg);
  const auto questions = by_id(ds);
  const fs::path root = c.out.empty() ? fs::path("ablation") : fs::path(c.out);

  std::vector<evaluation::ReportRow> rows;
  std::vector<evaluation::ScoredResult> base_scores;
  std::size_t soft_failures = 0;
  for (Variant v : kAblationVariants) {
    s.cfg.variant = v;
    auto run = execute_run(s, ds, dataset_arg, root / "runs", "", out);
    auto scored = score_run(s, run.dir, questions);
    soft_failures += run.failed + scored.failed;
    if (scored.scores.empty()) throw Error(Errc::EmptyInput, "variant " + std::string(to_string(v)) + " has no scores");
    rows.push_back(evaluation::aggregate_scores(scored.scores, v, cfg.normalization));
    if (v == Variant::ConQuer) base_scores = scored.scores;
  }
  write_score_reports(root, rows, base_scores, cfg, out, err);
  out << "soft_failures=" << soft_failures << "\n";
  return 0;
}

int cmd_report(const CLI::App& sub, const Common& c, const std::vector<std::string>& runs, std::ostream& out,
               std::ostream& err) {
  auto cfg = resolve_config(sub, c);
  std::vector<evaluation::ReportRow> rows;
  std::vector<evaluation::ScoredResult> base_scores;
  for (const auto& run : runs) {
    require_dir(run, "run");
    auto scores = load_scores(run);
    rows.push_back(evaluation::aggregate_scores(scores, run_variant(run), cfg.normalization));
    if (base_scores.empty()) base_scores = std::move(scores);
  }
  const fs::path dir = c.out.empty() ? fs::path("reports") : fs::path(c.out);
  fs::create_directories(dir);
  write_score_reports(dir, rows, base_scores, cfg, out, err);
  return 0;
}

int cmd_assess_difficulty(const CLI::App& sub, const Common& c, std::ostream& out) {
  auto cfg = resolve_config(sub, c);
  auto s = make_services(cfg, kJudge);
  auto ds = load_questions(dataset_path_or_default(c));
  auto jctx = judge_context(s);
  std::vector<std::optional<evaluation::DifficultyScore>> scores(ds.questions.size());
  std::vector<std::optional<json>> failed(ds.questions.size());
  parallel_for(ds.questions.size(), cfg.max_parallel_questions, [&](std::size_t i) {
    try {
      scores[i] = evaluation::assess_difficulty(ds.questions[i], jctx);
    } catch (const std::exception& e) {
      failed[i] = failure_json(ds.questions[i].id, e);
    }
  });
  std::vector<evaluation::DifficultyScore> ok;
  std::vector<json> lines, failures;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i]) {
      lines.push_back(evaluation::to_json(*scores[i]));
      ok.push_back(*scores[i]);
    }
    if (failed[i]) failures.push_back(std::move(*failed[i]));
  }
  const fs::path dir = c.out.empty() ? fs::path("reports") : fs::path(c.out);
  fs::create_directories(dir);
  write_jsonl(dir / "difficulty.jsonl", lines);
  write_jsonl(dir / "difficulty_failures.jsonl", failures);
  const auto means = evaluation::difficulty_means(ds.questions, ok);
  write_file(dir / "report_difficulty.csv", evaluation::difficulty_csv(means));
  out << "assessed=" << ok.size() << " failed=" << failures.size() << "\n";
  for (const auto& g : means)
    if (g.group_kind == "level") out << g.group << " mean=" << text::format_fixed(g.mean, 2) << " n=" << g.n << "\n";
  out << "report=" << (dir / "report_difficulty.csv").string() << "\n";
  return 0;
}

}  // namespace

std::string make_run_id(const RunConfig& cfg, const std::string& dataset_digest, const std::string& stamp) {
  const std::string digest = llm::sha256_hex(json(cfg).dump() + "\n" + dataset_digest + "\n" + stamp);
  return std::string(to_string(cfg.variant)) + "-" + digest.substr(0, 12);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concept-grounded quiz generation and evaluation", "conquer"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> areas, levels;
  std::size_t per_cell = 5;
  std::string run_dir, run_a, run_b;
  std::vector<std::string> report_runs;

  auto* gen = app.add_subcommand("gen-dataset", "generate the student-question dataset");
  add_common(gen, common);
  gen->add_option("--area", areas, "subject area (repeatable; default: all configured areas)");
  gen->add_option("--level", levels, "primary_school|high_school|phd (repeatable; default: all)");
  gen->add_option("--per-cell", per_cell, "questions per (area, level) cell");

  auto* run = app.add_subcommand("run", "run one pipeline variant over a dataset");
  add_common(run, common);

  auto* score = app.add_subcommand("score", "judge every quiz set of a run on five dimensions");
  add_common(score, common);
  score->add_option("--run", run_dir, "run directory")->required();

  auto* compare = app.add_subcommand("compare", "pairwise-judge two runs in both presentation orders");
  add_common(compare, common);
  compare->add_option("--run-a", run_a, "run directory of variant A")->required();
  compare->add_option("--run-b", run_b, "run directory of variant B")->required();

  auto* ablation = app.add_subcommand("ablation", "run and score the full variant and its three ablations");
  add_common(ablation, common);

  auto* report = app.add_subcommand("report", "score and correlation tables from scored runs");
  add_common(report, common);
  report->add_option("--run", report_runs, "scored run directory (repeatable; the first is the base row)")->required();

  auto* difficulty = app.add_subcommand("assess-difficulty", "judge the difficulty of every dataset question");
  add_common(difficulty, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_dataset(*gen, common, areas, levels, per_cell, out);
    if (run->parsed()) return cmd_run(*run, common, out);
    if (score->parsed()) return cmd_score(*score, common, run_dir, out);
    if (compare->parsed()) return cmd_compare(*compare, common, run_a, run_b, out);
    if (ablation->parsed()) return cmd_ablation(*ablation, common, out, err);
    if (report->parsed()) return cmd_report(*report, common, report_runs, out, err);
    if (difficulty->parsed()) return cmd_assess_difficulty(*difficulty, common, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace conquer::cli
