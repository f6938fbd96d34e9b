#pragma once

#include <iosfwd>

namespace cwvote::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitInput = 4;

// Entry point of the command-line tool. Reports go to `out` as JSON,
// diagnostics to `err`; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cwvote::cli
