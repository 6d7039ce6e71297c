#pragma once

#include <ostream>

namespace falldet::cli {

/// Exit codes: 0 success, 1 internal error, 2 bad input or configuration.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitBadInput = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace falldet::cli
