#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "conquer/dataset/dataset.hpp"
#include "conquer/error.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer::dataset {
namespace {

std::string cell_name(const std::string& area, Level level) { return area + "/" + std::string(to_string(level)); }

}  // namespace

std::string area_slug(std::string_view area) {
  std::string out;
  for (char c : area) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
    else if (!out.empty() && out.back() != '-') out.push_back('-');
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

std::vector<std::string> parse_numbered_list(const std::string& raw) {
  std::vector<std::string> items;
  for (const auto& raw_line : text::split_lines(raw)) {
    const std::string line = text::trim(raw_line);
    std::size_t i = 0;
    if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
      i = 1;
    } else {
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i == 0 || i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
      ++i;
    }
    std::string item = text::trim(std::string_view(line).substr(i));
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

QuestionDataset generate_question_set(const GenerationParams& params, llm::Gateway& gateway,
                                      const pipeline::PromptLibrary& prompts) {
  if (params.areas.empty() || params.levels.empty()) throw std::invalid_argument("gen-dataset: no areas or levels");
  if (params.per_cell == 0) throw std::invalid_argument("gen-dataset: per-cell count must be >= 1");

  QuestionDataset ds;
  ds.manifest = {params.areas, params.levels, params.per_cell, params.model, params.created_at};
  for (const auto& area : params.areas) {
    for (Level level : params.levels) {
      llm::ChatRequest req;
      req.model = params.model;
      req.temperature = params.temperature;
      req.max_output_tokens = params.max_output_tokens;
      req.user_prompt = text::render_template(prompts.dataset, {{"area", area},
                                                                {"level", std::string(level_display(level))},
                                                                {"n", std::to_string(params.per_cell)}});
      std::vector<std::string> items;
      for (int sample = 0; sample < 2; ++sample) {
        req.sample = sample;
        items = parse_numbered_list(gateway.chat(req).text);
        if (items.size() == params.per_cell) break;
      }
      if (items.size() != params.per_cell)
        throw Error(Errc::CellGenerationFailed, "cell " + cell_name(area, level) + " returned " +
                                                    std::to_string(items.size()) + " questions, expected " +
                                                    std::to_string(params.per_cell));
      for (std::size_t k = 0; k < items.size(); ++k)
        ds.questions.push_back({area_slug(area) + "-" + std::string(to_string(level)) + "-" + std::to_string(k + 1),
                                area, level, items[k]});
    }
  }
  validate_dataset(ds);
  return ds;
}

void validate_dataset(const QuestionDataset& ds) {
  const auto& m = ds.manifest;
  const std::set<std::string> areas(m.areas.begin(), m.areas.end());
  const std::set<Level> levels(m.levels.begin(), m.levels.end());
  std::set<std::string> ids;
  std::map<std::pair<std::string, Level>, std::size_t> counts;
  for (std::size_t i = 0; i < ds.questions.size(); ++i) {
    const auto& q = ds.questions[i];
    try {
      validate(q);
    } catch (const Error& e) {
      throw Error(Errc::SchemaViolation, e.what(), i + 1);
    }
    if (!ids.insert(q.id).second) throw Error(Errc::SchemaViolation, "duplicate id '" + q.id + "'", i + 1);
    if (!areas.count(q.area) || !levels.count(q.level))
      throw Error(Errc::SchemaViolation, "question '" + q.id + "' is outside the manifest's cells", i + 1);
    ++counts[{q.area, q.level}];
  }
  for (const auto& area : m.areas) {
    for (Level level : m.levels) {
      const auto n = counts[{area, level}];
      if (n != m.per_cell)
        throw Error(Errc::CellCountMismatch, "cell " + cell_name(area, level) + " has " + std::to_string(n) +
                                                 " questions, manifest says " + std::to_string(m.per_cell));
    }
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& questions_path) {
  return questions_path.parent_path() / (questions_path.stem().string() + ".manifest.json");
}

void save_dataset(const QuestionDataset& ds, const std::filesystem::path& path) {
  validate_dataset(ds);
  std::vector<json> lines;
  lines.reserve(ds.questions.size());
  for (const auto& q : ds.questions) lines.emplace_back(q);
  write_jsonl(path, lines);
  write_file(manifest_path(path), json(ds.manifest).dump(2) + "\n");
}

QuestionDataset load_dataset(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw Error(Errc::NotFound, "dataset " + path.string() + " does not exist");

  QuestionDataset ds;
  std::set<std::string> ids;
  read_jsonl(path, [&](const json& j, std::size_t line) {
    StudentQuestion q;
    try {
      q = j.get<StudentQuestion>();
      validate(q);
    } catch (const std::exception& e) {
      throw Error(Errc::SchemaViolation, "line " + std::to_string(line) + ": " + e.what(), line);
    }
    if (!ids.insert(q.id).second)
      throw Error(Errc::SchemaViolation, "line " + std::to_string(line) + ": duplicate id '" + q.id + "'", line);
    ds.questions.push_back(std::move(q));
  });

  if (ds.questions.empty()) throw Error(Errc::SchemaViolation, "dataset " + path.string() + " has no questions");

  const auto mpath = manifest_path(path);
  if (std::filesystem::exists(mpath, ec)) {
    try {
      ds.manifest = json::parse(read_file(mpath)).get<DatasetManifest>();
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(Errc::SchemaViolation, "manifest " + mpath.string() + ": " + e.what());
    }
  } else {
    auto& m = ds.manifest;
    std::map<std::pair<std::string, Level>, std::size_t> counts;
    for (const auto& q : ds.questions) {
      if (std::find(m.areas.begin(), m.areas.end(), q.area) == m.areas.end()) m.areas.push_back(q.area);
      if (std::find(m.levels.begin(), m.levels.end(), q.level) == m.levels.end()) m.levels.push_back(q.level);
      ++counts[{q.area, q.level}];
    }
    m.per_cell = ds.questions.empty() ? 0 : counts[{ds.questions[0].area, ds.questions[0].level}];
  }

  // Line numbers for schema errors found at dataset level.
  try {
    validate_dataset(ds);
  } catch (const Error& e) {
    if (e.code() != Errc::SchemaViolation) throw;
    throw Error(Errc::SchemaViolation, path.string() + ": " + e.what(), e.index());
  }
  return ds;
}

void to_json(nlohmann::json& j, const DatasetManifest& m) {
  std::vector<std::string> levels;
  for (Level l : m.levels) levels.emplace_back(to_string(l));
  j = {{"areas", m.areas},
       {"levels", levels},
       {"per_cell", m.per_cell},
       {"generator_model", m.generator_model},
       {"created_at", m.created_at}};
}

void from_json(const nlohmann::json& j, DatasetManifest& m) {
  m.areas = j.at("areas").get<std::vector<std::string>>();
  m.levels.clear();
  for (const auto& l : j.at("levels")) m.levels.push_back(parse_level(l.get<std::string>()));
  m.per_cell = j.at("per_cell").get<std::size_t>();
  m.generator_model = j.value("generator_model", std::string{});
  m.created_at = j.value("created_at", std::string{});
}

}  // namespace conquer::dataset
