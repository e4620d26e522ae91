#include <array>
#include <optional>

#include "conquer/pipeline/pipeline.hpp"
#include "conquer/text.hpp"

namespace conquer::pipeline {
namespace {

constexpr std::string_view kMarker = "[Quiz]";

// "B. text" / "B) text" -> ('B', "text")
std::optional<std::pair<char, std::string>> option_line(const std::string& line) {
  if (line.size() < 2) return std::nullopt;
  if (line[0] < 'A' || line[0] > 'Z' || (line[1] != '.' && line[1] != ')')) return std::nullopt;
  return std::make_pair(line[0], text::trim(std::string_view(line).substr(2)));
}

QuizCandidate parse_block(std::string_view block, std::size_t index) {
  std::optional<std::string> question;
  std::array<std::optional<std::string>, 26> by_letter;
  for (const auto& raw : text::split_lines(block)) {
    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    if (!question && text::starts_with_ci(line, "Quiz:")) {
      question = text::trim(std::string_view(line).substr(5));
      continue;
    }
    if (auto opt = option_line(line)) {
      auto& slot = by_letter[static_cast<std::size_t>(opt->first - 'A')];
      if (slot) throw Error(Errc::MalformedBlock, std::string("duplicate option ") + opt->first, index);
      slot = opt->second;
    }
  }
  if (!question) throw Error(Errc::MalformedBlock, "no 'Quiz:' line", index);
  QuizCandidate quiz{*question, {}};
  bool gap = false;
  for (std::size_t i = 0; i < by_letter.size(); ++i) {
    if (!by_letter[i]) {
      if (i < kOptionsPerQuiz)
        throw Error(Errc::MalformedBlock, std::string("missing option ") + static_cast<char>('A' + i), index);
      gap = true;
      continue;
    }
    if (gap) throw Error(Errc::MalformedBlock, std::string("stray option ") + static_cast<char>('A' + i), index);
    quiz.options.push_back(*by_letter[i]);
  }
  return quiz;
}

}  // namespace

QuizSet parse_quiz_output(const std::string& raw, const std::string& question_id, Variant variant) {
  std::vector<std::string_view> blocks;
  std::string_view rest(raw);
  auto pos = rest.find(kMarker);
  while (pos != std::string_view::npos) {
    rest.remove_prefix(pos + kMarker.size());
    pos = rest.find(kMarker);
    blocks.push_back(rest.substr(0, pos));
  }
  if (blocks.size() != kQuizzesPerSet)
    throw Error(Errc::MarkerCountMismatch,
                "expected " + std::to_string(kQuizzesPerSet) + " [Quiz] blocks, found " + std::to_string(blocks.size()));

  QuizSetCandidate candidate{question_id, variant, {}};
  for (std::size_t i = 0; i < blocks.size(); ++i) candidate.quizzes.push_back(parse_block(blocks[i], i));
  return validate_quiz_set(candidate);
}

std::string render_quiz_set(const QuizSet& qs) {
  std::string out;
  for (std::size_t i = 0; i < qs.quizzes.size(); ++i) {
    if (i) out += "\n";
    out += "[Quiz]\nQuiz: " + qs.quizzes[i].question + "\n";
    for (std::size_t k = 0; k < kOptionsPerQuiz; ++k) {
      out.push_back(static_cast<char>('A' + k));
      out += ". " + qs.quizzes[i].options[k] + "\n";
    }
  }
  return out;
}

}  // namespace conquer::pipeline
