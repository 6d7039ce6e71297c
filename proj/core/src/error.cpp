#include "falldet/error.hpp"

namespace falldet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidShape: return "invalid-shape";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kCorruption: return "corruption";
    case ErrorCode::kIncomplete: return "incomplete";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kDegenerateData: return "degenerate-data";
    case ErrorCode::kInconsistent: return "inconsistent";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

}  // namespace falldet
