#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conquer/domain.hpp"

namespace conquer {

using json = nlohmann::json;

void to_json(json& j, const StudentQuestion& q);
void from_json(const json& j, StudentQuestion& q);
void to_json(json& j, const Quiz& quiz);
void to_json(json& j, const QuizSet& qs);
/// Routes through validate_quiz_set, so malformed input throws its errors.
void from_json(const json& j, QuizSet& qs);
void to_json(json& j, const ConceptSet& cs);
void from_json(const json& j, ConceptSet& cs);
void to_json(json& j, const TokenSpan& span);
void from_json(const json& j, TokenSpan& span);
void to_json(json& j, const KnowledgeChunk& chunk);
void from_json(const json& j, KnowledgeChunk& chunk);
void to_json(json& j, const ChunkRef& ref);
void from_json(const json& j, ChunkRef& ref);
void to_json(json& j, const Summary& s);
void from_json(const json& j, Summary& s);
void to_json(json& j, const DimensionScores& s);
void from_json(const json& j, DimensionScores& s);
void to_json(json& j, const PairVerdict& v);
void from_json(const json& j, PairVerdict& v);
void to_json(json& j, const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const json& j, RunConfig& cfg);

/// Compact single-line dump used for every JSONL artifact.
std::string dump_line(const json& j);

/// Reads a JSONL file; blank lines are skipped. The callback receives the
/// 1-based line number. Parse errors throw Error(SchemaViolation, line).
void read_jsonl(const std::filesystem::path& path, const std::function<void(const json&, std::size_t)>& on_line);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace conquer
