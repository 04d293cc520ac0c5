#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssa {

enum class ErrorCode {
  kOutOfRangeScore,
  kUnsupportedScale,
  kMissingField,
  kOutOfRange,
  kUnknownEnumValue,
  kInvalidValue,
  kHeaderMismatch,
  kRowError,
  kTooFewRecords,
  kEmptyTrainingSet,
  kSchemaMismatch,
  kGridEmpty,
  kTooManyFeatures,
  kEmptyDataset,
  kUnknownFeature,
  kEmptySample,
  kMissingLabels,
  kNoDifference,
  kAmbiguousPair,
  kUnequalInformation,
  kConflictingLevels,
  kIndeterminateDirection,
  kUnknownTemplate,
  kMissingRelationship,
  kModelNotLoaded,
  kUnknownConflict,
  kUnknownContact,
  kNotFound,
  kStorageFailure,
  kFormatError,
  kUnsupportedVersion,
  kIoError,
  kUnauthorized,
};

std::string_view error_code_name(ErrorCode code);

/// Base exception for every failure raised by the library. Carries a
/// machine-readable code and, when applicable, the offending field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, const std::string& message)
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}
  Error(ErrorCode code, const std::string& message)
      : Error(code, std::string{}, message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

struct Violation {
  ErrorCode code;
  std::string field;
  std::string message;
};

/// Raised when validation collects more than a single problem. what() joins
/// all messages; violations() keeps them structured.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<Violation> violations_;
};

struct RowIssue {
  std::size_t row;  // 1-based data row, header excluded
  std::vector<Violation> violations;
};

class RowError : public Error {
 public:
  explicit RowError(std::vector<RowIssue> rows);

  const std::vector<RowIssue>& rows() const noexcept { return rows_; }
  std::vector<std::size_t> row_numbers() const;

 private:
  std::vector<RowIssue> rows_;
};

}  // namespace ssa
