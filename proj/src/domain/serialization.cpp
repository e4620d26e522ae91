#include "conquer/serialization.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include "conquer/error.hpp"

namespace conquer {
namespace {

template <typename T>
T require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::SchemaViolation, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

void to_json(json& j, const StudentQuestion& q) {
  j = json{{"id", q.id}, {"area", q.area}, {"level", to_string(q.level)}, {"text", q.text}};
}

void from_json(const json& j, StudentQuestion& q) {
  q.id = require<std::string>(j, "id");
  q.area = require<std::string>(j, "area");
  q.level = parse_level(require<std::string>(j, "level"));
  q.text = require<std::string>(j, "text");
}

void to_json(json& j, const Quiz& quiz) {
  j = json{{"question", quiz.question},
           {"options", json::array({quiz.options[0], quiz.options[1], quiz.options[2], quiz.options[3]})},
           {"correct_index", Quiz::kCorrectIndex}};
}

void to_json(json& j, const QuizSet& qs) {
  j = json{{"question_id", qs.question_id}, {"variant", to_string(qs.variant)}, {"quizzes", qs.quizzes}};
}

void from_json(const json& j, QuizSet& qs) {
  QuizSetCandidate cand;
  cand.question_id = require<std::string>(j, "question_id");
  cand.variant = parse_variant(require<std::string>(j, "variant"));
  for (const auto& q : require<json>(j, "quizzes")) {
    if (q.contains("correct_index") && q["correct_index"] != 0)
      throw Error(Errc::SchemaViolation, "correct_index must be 0 (option A)");
    cand.quizzes.push_back({require<std::string>(q, "question"), require<std::vector<std::string>>(q, "options")});
  }
  qs = validate_quiz_set(cand);
}

void to_json(json& j, const ConceptSet& cs) {
  j = json{{"question_id", cs.question_id}, {"concepts", cs.concepts}, {"origin", to_string(cs.origin)}};
}

void from_json(const json& j, ConceptSet& cs) {
  cs = make_concept_set(require<std::string>(j, "question_id"), require<std::vector<std::string>>(j, "concepts"),
                        parse_concept_origin(require<std::string>(j, "origin")));
}

void to_json(json& j, const TokenSpan& span) { j = json::array({span.start, span.end}); }

void from_json(const json& j, TokenSpan& span) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::SchemaViolation, "token_span must be [start, end]");
  span.start = j[0].get<std::size_t>();
  span.end = j[1].get<std::size_t>();
  if (span.end < span.start) throw Error(Errc::SchemaViolation, "token_span end < start");
}

void to_json(json& j, const KnowledgeChunk& chunk) {
  j = json{{"source", to_string(chunk.source)},
           {"concept", chunk.concept_name},
           {"article_title", chunk.article_title},
           {"text", chunk.text},
           {"token_span", chunk.token_span},
           {"similarity", chunk.similarity ? json(*chunk.similarity) : json(nullptr)}};
}

void from_json(const json& j, KnowledgeChunk& chunk) {
  chunk.source = parse_knowledge_source(require<std::string>(j, "source"));
  chunk.concept_name = require<std::string>(j, "concept");
  chunk.article_title = require<std::string>(j, "article_title");
  chunk.text = require<std::string>(j, "text");
  chunk.token_span = require<TokenSpan>(j, "token_span");
  chunk.similarity.reset();
  if (j.contains("similarity") && !j["similarity"].is_null()) {
    double s = j["similarity"].get<double>();
    if (s < -1.0 || s > 1.0) throw Error(Errc::SchemaViolation, "similarity outside [-1, 1]");
    chunk.similarity = s;
  }
}

void to_json(json& j, const ChunkRef& ref) {
  j = json{{"source", to_string(ref.source)},
           {"concept", ref.concept_name},
           {"article_title", ref.article_title},
           {"token_span", ref.token_span}};
}

void from_json(const json& j, ChunkRef& ref) {
  ref.source = parse_knowledge_source(require<std::string>(j, "source"));
  ref.concept_name = require<std::string>(j, "concept");
  ref.article_title = require<std::string>(j, "article_title");
  ref.token_span = require<TokenSpan>(j, "token_span");
}

void to_json(json& j, const Summary& s) {
  j = json{{"question_id", s.question_id}, {"text", s.text}, {"source_chunks", s.source_chunks}};
}

void from_json(const json& j, Summary& s) {
  s.question_id = require<std::string>(j, "question_id");
  s.text = require<std::string>(j, "text");
  if (s.text.empty()) throw Error(Errc::SchemaViolation, "summary text is empty");
  s.source_chunks = require<std::vector<ChunkRef>>(j, "source_chunks");
}

void to_json(json& j, const DimensionScores& s) {
  j = json::object();
  for (Dimension d : kDimensions) j[std::string(dimension_key(d))] = s[d];
}

void from_json(const json& j, DimensionScores& s) {
  std::array<int, kDimensionCount> values{};
  for (Dimension d : kDimensions) values[index_of(d)] = require<int>(j, std::string(dimension_key(d)).c_str());
  s = DimensionScores(values);
}

void to_json(json& j, const PairVerdict& v) {
  json choices = json::object();
  for (Dimension d : kDimensions) choices[std::string(dimension_key(d))] = v[d] == Choice::First ? 1 : 2;
  j = json{{"order", to_string(v.order)}, {"choices", choices}};
}

void from_json(const json& j, PairVerdict& v) {
  v.order = parse_order(require<std::string>(j, "order"));
  const json choices = require<json>(j, "choices");
  for (Dimension d : kDimensions) {
    int c = require<int>(choices, std::string(dimension_key(d)).c_str());
    if (c != 1 && c != 2) throw Error(Errc::SchemaViolation, "pair choice must be 1 or 2");
    v.choices[index_of(d)] = c == 1 ? Choice::First : Choice::Second;
  }
}

void to_json(json& j, const RunConfig& cfg) {
  j = json{{"variant", to_string(cfg.variant)},
           {"chunk_size", cfg.chunk_size},
           {"chunk_overlap", cfg.chunk_overlap},
           {"top_k", cfg.top_k},
           {"per_concept_top_k", cfg.per_concept_top_k},
           {"generator_model", cfg.generator_model},
           {"judge_model", cfg.judge_model},
           {"embedding_model", cfg.embedding_model},
           {"generation_temperature", cfg.generation_temperature},
           {"judge_temperature", cfg.judge_temperature},
           {"max_output_tokens", cfg.max_output_tokens},
           {"cache_dir", cfg.cache_dir},
           {"seed", cfg.seed},
           {"max_parallel_questions", cfg.max_parallel_questions},
           {"requests_per_minute", cfg.requests_per_minute},
           {"max_attempts", cfg.max_attempts},
           {"normalization", cfg.normalization == Normalization::Times20 ? "times20" : "affine"},
           {"correlation", cfg.correlation == CorrelationMethod::Pearson ? "pearson" : "spearman"},
           {"mock", cfg.mock},
           {"corpus_dir", cfg.corpus_dir},
           {"prompts_dir", cfg.prompts_dir},
           {"areas_path", cfg.areas_path}};
}

void from_json(const json& j, RunConfig& cfg) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "variant") cfg.variant = parse_variant(value.get<std::string>());
      else if (key == "chunk_size") cfg.chunk_size = value.get<std::size_t>();
      else if (key == "chunk_overlap") cfg.chunk_overlap = value.get<std::size_t>();
      else if (key == "top_k") cfg.top_k = value.get<std::size_t>();
      else if (key == "per_concept_top_k") cfg.per_concept_top_k = value.get<bool>();
      else if (key == "generator_model") cfg.generator_model = value.get<std::string>();
      else if (key == "judge_model") cfg.judge_model = value.get<std::string>();
      else if (key == "embedding_model") cfg.embedding_model = value.get<std::string>();
      else if (key == "generation_temperature") cfg.generation_temperature = value.get<double>();
      else if (key == "judge_temperature") cfg.judge_temperature = value.get<double>();
      else if (key == "max_output_tokens") cfg.max_output_tokens = value.get<int>();
      else if (key == "cache_dir") cfg.cache_dir = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "max_parallel_questions") cfg.max_parallel_questions = value.get<std::size_t>();
      else if (key == "requests_per_minute") cfg.requests_per_minute = value.get<double>();
      else if (key == "max_attempts") cfg.max_attempts = value.get<int>();
      else if (key == "normalization") {
        auto s = value.get<std::string>();
        if (s == "times20") cfg.normalization = Normalization::Times20;
        else if (s == "affine") cfg.normalization = Normalization::Affine;
        else throw Error(Errc::ConfigError, "normalization must be 'times20' or 'affine'");
      } else if (key == "correlation") {
        auto s = value.get<std::string>();
        if (s == "pearson") cfg.correlation = CorrelationMethod::Pearson;
        else if (s == "spearman") cfg.correlation = CorrelationMethod::Spearman;
        else throw Error(Errc::ConfigError, "correlation must be 'pearson' or 'spearman'");
      } else if (key == "mock") cfg.mock = value.get<bool>();
      else if (key == "corpus_dir") cfg.corpus_dir = value.get<std::string>();
      else if (key == "prompts_dir") cfg.prompts_dir = value.get<std::string>();
      else if (key == "areas_path") cfg.areas_path = value.get<std::string>();
      else throw Error(Errc::ConfigError, "unknown config field '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    throw Error(Errc::ConfigError, e.what());
  }
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

void read_jsonl(const std::filesystem::path& path, const std::function<void(const json&, std::size_t)>& on_line) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::SchemaViolation, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::SchemaViolation, path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    on_line(j, lineno);
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines) {
  std::string out;
  for (const auto& j : lines) {
    out += dump_line(j);
    out.push_back('\n');
  }
  write_file(path, out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + tmp.string());
    out << contents;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::ConfigError, "cannot rename into " + path.string() + ": " + ec.message());
}

}  // namespace conquer
