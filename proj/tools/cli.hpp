#pragma once

namespace tripletbench::cli {

// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, char** argv);

}  // namespace tripletbench::cli
