#pragma once

#include <ostream>
#include <span>
#include <string>

namespace vocabhull::cli {

inline constexpr const char* kToolName = "vocab-hull";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

// Runs one subcommand. `args` excludes the program name. The JSON report
// (or a JSON error object) goes to `out`; logs and usage go to `err`.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vocabhull::cli
