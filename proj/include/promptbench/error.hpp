#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace promptbench {

enum class ErrorCode {
  MissingFile,
  MalformedHeader,
  MalformedRow,
  WrongPairCount,
  EmptyWord,
  EmptyInput,
  AuthMissing,
  ProviderError,
  RetriesExhausted,
  DimensionMismatch,
  NonFiniteVector,
  OfflineMiss,
  CorruptEntry,
  StorageFull,
  IoError,
  ZeroVector,
  LengthMismatch,
  DegenerateInput,
  MissingEmbedding,
  MissingBareCell,
  NoCells,
  ConfigInvalid,
  UnknownDataset,
  UnknownCondition,
  InconsistentReport,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::WrongPairCount: return "WrongPairCount";
    case ErrorCode::EmptyWord: return "EmptyWord";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::RetriesExhausted: return "RetriesExhausted";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteVector: return "NonFiniteVector";
    case ErrorCode::OfflineMiss: return "OfflineMiss";
    case ErrorCode::CorruptEntry: return "CorruptEntry";
    case ErrorCode::StorageFull: return "StorageFull";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::MissingBareCell: return "MissingBareCell";
    case ErrorCode::NoCells: return "NoCells";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::UnknownCondition: return "UnknownCondition";
    case ErrorCode::InconsistentReport: return "InconsistentReport";
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name);

/// Single exception type for the harness. Loader errors carry the 1-based
/// source line they refer to.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(code, message, line)), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out{to_string(code)};
    if (line) out += " (line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace promptbench
