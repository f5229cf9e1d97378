#pragma once

#include <iosfwd>

namespace opensub::cli {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

// Environment variable overriding the default tolerance (1e-10).
inline constexpr const char* kTolEnv = "OPENSUB_TOL";

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace opensub::cli
