#include "ssa/error.hpp"

#include <sstream>

namespace ssa {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRangeScore: return "OutOfRangeScore";
    case ErrorCode::kUnsupportedScale: return "UnsupportedScale";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kUnknownEnumValue: return "UnknownEnumValue";
    case ErrorCode::kInvalidValue: return "InvalidValue";
    case ErrorCode::kHeaderMismatch: return "HeaderMismatch";
    case ErrorCode::kRowError: return "RowError";
    case ErrorCode::kTooFewRecords: return "TooFewRecords";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kGridEmpty: return "GridEmpty";
    case ErrorCode::kTooManyFeatures: return "TooManyFeatures";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kMissingLabels: return "MissingLabels";
    case ErrorCode::kNoDifference: return "NoDifference";
    case ErrorCode::kAmbiguousPair: return "AmbiguousPair";
    case ErrorCode::kUnequalInformation: return "UnequalInformation";
    case ErrorCode::kConflictingLevels: return "ConflictingLevels";
    case ErrorCode::kIndeterminateDirection: return "IndeterminateDirection";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kMissingRelationship: return "MissingRelationship";
    case ErrorCode::kModelNotLoaded: return "ModelNotLoaded";
    case ErrorCode::kUnknownConflict: return "UnknownConflict";
    case ErrorCode::kUnknownContact: return "UnknownContact";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kStorageFailure: return "StorageFailure";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnauthorized: return "Unauthorized";
  }
  return "Unknown";
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << error_code_name(violations[i].code) << "(" << violations[i].field
        << "): " << violations[i].message;
  }
  return out.str();
}

std::string join_rows(const std::vector<RowIssue>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out << "\n";
    out << "row " << rows[i].row << ": " << join_violations(rows[i].violations);
  }
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::kInvalidValue : violations[0].code,
            violations.empty() ? std::string{} : violations[0].field,
            join_violations(violations)),
      violations_(std::move(violations)) {}

RowError::RowError(std::vector<RowIssue> rows)
    : Error(ErrorCode::kRowError, join_rows(rows)), rows_(std::move(rows)) {}

std::vector<std::size_t> RowError::row_numbers() const {
  std::vector<std::size_t> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.row);
  return out;
}

}  // namespace ssa
