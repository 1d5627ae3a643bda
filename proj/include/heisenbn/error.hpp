#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heisenbn {

enum class ErrorCode {
  // structural / validation
  DuplicateId,
  InvalidStateSpace,
  CycleDetected,
  UnknownParent,
  CpdShapeMismatch,
  RowNotNormalized,
  ParameterOutOfRange,
  IncompatibleIntervals,
  UnknownNode,
  InvalidEvidence,
  NotAnIntervalNode,
  EvidenceNotOnTop,
  MissingDimension,
  SchemaMismatch,
  NegativeInput,
  CountOutOfRange,
  EmptyRecords,
  TargetNotSummarizable,
  SyntaxError,
  SchemaError,
  // runtime
  ZeroProbabilityEvidence,
  TooLarge,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad input (CLI exit code 1); false for runtime
/// failures such as impossible evidence (exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  /// Document path (JSON pointer) or node id the error refers to; may be empty.
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

  /// Same error with `prefix` prepended to the path.
  Error with_path_prefix(std::string_view prefix) const;

 private:
  ErrorCode code_;
  std::string message_;
  std::string path_;
};

}  // namespace heisenbn
