#include "cec/errors.hpp"

#include <fmt/format.h>

namespace cec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::BadArity: return "BadArity";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::BadOrder: return "BadOrder";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::GenerationParse: return "GenerationParseError";
    case ErrorKind::DuplicateIntermediate: return "DuplicateIntermediate";
    case ErrorKind::RankExtraction: return "RankExtractionError";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::ReplayMiss: return "ReplayMiss";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::UnsupportedOperation: return "UnsupportedOperation";
    case ErrorKind::StoreCorrupt: return "StoreCorrupt";
    case ErrorKind::EmptyScore: return "EmptyScore";
    case ErrorKind::NonFiniteScore: return "NonFiniteScore";
    case ErrorKind::InapplicableConjunction: return "InapplicableConjunction";
    case ErrorKind::UnknownName: return "UnknownName";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::RankingFailed: return "RankingFailed";
    case ErrorKind::ScoringFailed: return "ScoringFailed";
    case ErrorKind::NothingScored: return "NothingScored";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::DigestMismatch: return "DigestMismatch";
    case ErrorKind::BadInput: return "BadInput";
  }
  return "Unknown";
}

ErrorKind parse_error_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ErrorKind::BadInput); ++k) {
    if (to_string(static_cast<ErrorKind>(k)) == name) return static_cast<ErrorKind>(k);
  }
  throw Error(ErrorKind::UnknownName, fmt::format("unknown error kind '{}'", name));
}

std::string_view to_string(Violation violation) {
  switch (violation) {
    case Violation::WrongLength: return "wrong length";
    case Violation::EmptyText: return "empty text";
    case Violation::MissingGroup: return "missing group";
    case Violation::SlotLayout: return "wrong slot layout";
    case Violation::DuplicateSlot: return "duplicate slot";
    case Violation::DuplicateText: return "duplicate text";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(kind), message)), kind_(kind) {}

InvariantViolation::InvariantViolation(Violation violation, const std::string& detail)
    : Error(ErrorKind::InvariantViolation,
            fmt::format("{} ({})", to_string(violation), detail)),
      violation_(violation) {}

GenerationParseError::GenerationParseError(std::size_t found_count)
    : Error(ErrorKind::GenerationParse,
            fmt::format("expected 2 candidate lines, found {}", found_count)),
      found_count_(found_count) {}

RankExtractionError::RankExtractionError(std::vector<std::string> strategy_log)
    : Error(ErrorKind::RankExtraction,
            fmt::format("no strategy produced a permutation [{}]",
                        fmt::join(strategy_log, "; "))),
      log_(std::move(strategy_log)) {}

StoreCorrupt::StoreCorrupt(const std::string& file, std::size_t line, const std::string& reason)
    : Error(ErrorKind::StoreCorrupt, fmt::format("{}:{}: {}", file, line, reason)), line_(line) {}

}  // namespace cec
