#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace falldet {

enum class ErrorCode {
  kInvalidShape,   // a requested extent is zero or negative
  kShape,          // operands disagree on shape or produce an empty output
  kFormat,         // bad magic, version, header or schema
  kCorruption,     // checksum mismatch or truncated payload
  kIncomplete,     // required entries are missing
  kValidation,     // well-formed input that contradicts the model config
  kDegenerateData, // e.g. a single class where two are required
  kInconsistent,   // mixed frame dimensions and similar
  kEmptyInput,     // nothing to process
  kIo,             // file system failures
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by falldet. The code lets callers
/// (and the CLI exit-code mapping) distinguish failure classes without
/// parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace falldet
