#include "heisenbn/error.hpp"

namespace heisenbn {

namespace {

std::string format_what(ErrorCode code, const std::string& message,
                        const std::string& path) {
  std::string out(to_string(code));
  out += ": ";
  out += message;
  if (!path.empty()) {
    out += " (at ";
    out += path;
    out += ")";
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidStateSpace: return "InvalidStateSpace";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::CpdShapeMismatch: return "CpdShapeMismatch";
    case ErrorCode::RowNotNormalized: return "RowNotNormalized";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::IncompatibleIntervals: return "IncompatibleIntervals";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidEvidence: return "InvalidEvidence";
    case ErrorCode::NotAnIntervalNode: return "NotAnIntervalNode";
    case ErrorCode::EvidenceNotOnTop: return "EvidenceNotOnTop";
    case ErrorCode::MissingDimension: return "MissingDimension";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::CountOutOfRange: return "CountOutOfRange";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::TargetNotSummarizable: return "TargetNotSummarizable";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroProbabilityEvidence:
    case ErrorCode::TooLarge:
    case ErrorCode::Io:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(format_what(code, message, path)),
      code_(code),
      message_(message),
      path_(std::move(path)) {}

Error Error::with_path_prefix(std::string_view prefix) const {
  std::string joined(prefix);
  if (!path_.empty()) {
    if (path_.front() != '/') joined += '/';
    joined += path_;
  }
  return Error(code_, message_, std::move(joined));
}

}  // namespace heisenbn
