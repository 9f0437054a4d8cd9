#include "gcal/error.h"

namespace gcal {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch:
      return "ShapeMismatch";
    case ErrorCode::kNonScalarLoss:
      return "NonScalarLoss";
    case ErrorCode::kMissingFile:
      return "MissingFile";
    case ErrorCode::kMissingContent:
      return "MissingContent";
    case ErrorCode::kMalformedRecord:
      return "MalformedRecord";
    case ErrorCode::kNegativeCount:
      return "NegativeCount";
    case ErrorCode::kEmptySentence:
      return "EmptySentence";
    case ErrorCode::kOracleMissing:
      return "OracleMissing";
    case ErrorCode::kDivergence:
      return "DivergenceDetected";
    case ErrorCode::kCorruptFile:
      return "CorruptFile";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message), code_(code) {}

}  // namespace gcal
