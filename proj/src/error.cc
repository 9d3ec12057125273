#include "blindspot/error.h"

namespace blindspot {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kMissingColumn: return "MissingColumn";
    case ErrorKind::kNonNumericCell: return "NonNumericCell";
    case ErrorKind::kInvalidLabel: return "InvalidLabel";
    case ErrorKind::kEmptySeries: return "EmptySeries";
    case ErrorKind::kSeriesTooShort: return "SeriesTooShort";
    case ErrorKind::kDegenerateSplit: return "DegenerateSplit";
    case ErrorKind::kEmptyTable: return "EmptyTable";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kMissingRowId: return "MissingRowId";
    case ErrorKind::kProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorKind::kDuplicateRowId: return "DuplicateRowId";
    case ErrorKind::kUnknownFeature: return "UnknownFeature";
    case ErrorKind::kSingularSystem: return "SingularSystem";
    case ErrorKind::kNoExplanations: return "NoExplanations";
    case ErrorKind::kInvalidSpec: return "InvalidSpec";
    case ErrorKind::kFormatError: return "FormatError";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) { return kind == ErrorKind::kSingularSystem; }

}  // namespace blindspot
