#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

enum class ErrorKind {
  InvariantViolation,
  BadArity,
  IdMismatch,
  EmptyGroup,
  IndexOutOfRange,
  BadOrder,
  SingleCluster,
  GenerationParse,
  DuplicateIntermediate,
  RankExtraction,
  BackendUnavailable,
  ReplayMiss,
  BudgetExceeded,
  UnsupportedOperation,
  StoreCorrupt,
  EmptyScore,
  NonFiniteScore,
  InapplicableConjunction,
  UnknownName,
  GenerationFailed,
  RankingFailed,
  ScoringFailed,
  NothingScored,
  IoFailure,
  DigestMismatch,
  BadInput,
};

std::string_view to_string(ErrorKind kind);

/// Inverse of to_string; throws UnknownName.
ErrorKind parse_error_kind(std::string_view name);

/// Base of every error raised by the library. The kind is stable and
/// machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class Violation {
  WrongLength,
  EmptyText,
  MissingGroup,
  SlotLayout,
  DuplicateSlot,
  DuplicateText,
};

std::string_view to_string(Violation violation);

class InvariantViolation : public Error {
 public:
  InvariantViolation(Violation violation, const std::string& detail);

  Violation violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

class GenerationParseError : public Error {
 public:
  explicit GenerationParseError(std::size_t found_count);

  std::size_t found_count() const noexcept { return found_count_; }

 private:
  std::size_t found_count_;
};

class RankExtractionError : public Error {
 public:
  explicit RankExtractionError(std::vector<std::string> strategy_log);

  const std::vector<std::string>& strategy_log() const noexcept { return log_; }

 private:
  std::vector<std::string> log_;
};

class StoreCorrupt : public Error {
 public:
  StoreCorrupt(const std::string& file, std::size_t line, const std::string& reason);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cec
