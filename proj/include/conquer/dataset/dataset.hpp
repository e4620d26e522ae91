#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conquer/domain.hpp"
#include "conquer/llm/gateway.hpp"
#include "conquer/pipeline/pipeline.hpp"

namespace conquer::dataset {

struct DatasetManifest {
  std::vector<std::string> areas;
  std::vector<Level> levels;
  std::size_t per_cell = 5;
  std::string generator_model;
  std::string created_at;

  bool operator==(const DatasetManifest&) const = default;
};

struct QuestionDataset {
  std::vector<StudentQuestion> questions;
  DatasetManifest manifest;

  bool operator==(const QuestionDataset&) const = default;
};

/// "government and politics" -> "government-and-politics"
std::string area_slug(std::string_view area);

/// Items of a numbered ("1." / "1)") or dashed list, in order. Lines that
/// are not list items are ignored.
std::vector<std::string> parse_numbered_list(const std::string& raw);

struct GenerationParams {
  std::vector<std::string> areas;
  std::vector<Level> levels;
  std::size_t per_cell = 5;
  std::string model;
  double temperature = 0.7;
  int max_output_tokens = 1024;
  std::string created_at;
};

/// One model call per (area, level) cell; a cell whose list has the wrong
/// length is asked once more, then fails with Error(CellGenerationFailed).
QuestionDataset generate_question_set(const GenerationParams& params, llm::Gateway& gateway,
                                      const pipeline::PromptLibrary& prompts);

/// Cell completeness and id uniqueness. Errors: SchemaViolation,
/// CellCountMismatch (message names the cell).
void validate_dataset(const QuestionDataset& ds);

/// The manifest lives beside the questions: dataset.jsonl ->
/// dataset.manifest.json.
std::filesystem::path manifest_path(const std::filesystem::path& questions_path);

void save_dataset(const QuestionDataset& ds, const std::filesystem::path& path);

/// Re-validates everything. Errors: NotFound, SchemaViolation (index = line
/// number), CellCountMismatch. Without a manifest file the manifest is
/// inferred from the questions (cells in first-appearance order, per-cell
/// count from the first cell).
QuestionDataset load_dataset(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

}  // namespace conquer::dataset
