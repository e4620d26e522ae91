#include <stdexcept>

#include "conquer/pipeline/pipeline.hpp"
#include "conquer/serialization.hpp"
#include "conquer/text.hpp"

namespace conquer::pipeline {

std::filesystem::path resolve_resource(const std::filesystem::path& p) {
  std::error_code ec;
  if (p.empty() || std::filesystem::exists(p, ec) || p.is_absolute()) return p;
  auto shipped = std::filesystem::path(CONQUER_SOURCE_DIR) / p;
  return std::filesystem::exists(shipped, ec) ? shipped : p;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  const auto root = resolve_resource(dir);
  auto read = [&](const char* name) { return read_file(root / name); };
  PromptLibrary lib;
  lib.baseline = read("baseline.txt");
  lib.conquer = read("conquer.txt");
  lib.concepts = read("concepts.txt");
  lib.summary = read("summary.txt");
  lib.judge = read("judge.txt");
  lib.pairwise = read("pairwise.txt");
  lib.difficulty = read("difficulty.txt");
  lib.dataset = read("dataset.txt");
  return lib;
}

std::string render_generation_prompt(const StudentQuestion& q, const std::optional<std::string>& context,
                                     Variant variant, const PromptLibrary& prompts) {
  const std::vector<std::pair<std::string, std::string>> common = {
      {"area", q.area}, {"level", std::string(level_display(q.level))}, {"question", q.text}};
  if (variant == Variant::Baseline) {
    if (context) throw std::invalid_argument("baseline generation takes no context");
    return text::render_template(prompts.baseline, common);
  }
  if (!context || text::trim(*context).empty())
    throw std::invalid_argument(std::string(to_string(variant)) + " generation needs reference context");
  auto values = common;
  values.emplace_back("summary", *context);
  return text::render_template(prompts.conquer, values);
}

}  // namespace conquer::pipeline
