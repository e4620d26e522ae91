#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conquer {

/// Every failure the library reports carries one of these codes so callers
/// (and tests) can branch on the kind of failure instead of the message.
enum class Errc {
  // domain validation
  WrongQuizCount,
  WrongOptionCount,
  DuplicateOptions,
  EmptyField,
  InvalidValue,
  // llm gateway
  ProviderUnreachable,
  ProviderRejected,
  EmptyCompletion,
  DimensionMismatch,
  // knowledge
  NotFound,
  Unreachable,
  AllConceptsFailed,
  // pipeline
  UnparseableConceptList,
  EmptyAfterFiltering,
  MarkerCountMismatch,
  MalformedBlock,
  StageFailed,
  // evaluation
  NoJsonFound,
  MissingKey,
  UnexpectedKey,
  ValueOutOfDomain,
  JudgeUnparseable,
  OrderPairIncomplete,
  EmptyInput,
  InsufficientData,
  // dataset
  CellGenerationFailed,
  SchemaViolation,
  CellCountMismatch,
  // cli
  QuestionSetMismatch,
  ConfigError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), index_(index) {}

  Errc code() const noexcept { return code_; }

  /// Offending element index (quiz index, block index, line number) when the
  /// failure is positional.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

}  // namespace conquer
