#ifndef GCAL_ERROR_H_
#define GCAL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace gcal {

enum class ErrorCode {
  kShapeMismatch,
  kNonScalarLoss,
  kMissingFile,
  kMissingContent,
  kMalformedRecord,
  kNegativeCount,
  kEmptySentence,
  kOracleMissing,
  kDivergence,
  kCorruptFile,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gcal

#endif  // GCAL_ERROR_H_
