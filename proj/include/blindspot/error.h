#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blindspot {

enum class ErrorKind {
  kInvalidArgument,
  kIoError,
  kMissingColumn,
  kNonNumericCell,
  kInvalidLabel,
  kEmptySeries,
  kSeriesTooShort,
  kDegenerateSplit,
  kEmptyTable,
  kSchemaMismatch,
  kMissingRowId,
  kProbabilityOutOfRange,
  kDuplicateRowId,
  kUnknownFeature,
  kSingularSystem,
  kNoExplanations,
  kInvalidSpec,
  kFormatError,
};

std::string_view error_kind_name(ErrorKind kind);

// True for failures of the numerical kernels (as opposed to bad input data).
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace blindspot
