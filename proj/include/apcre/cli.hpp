#pragma once

namespace apcre {

// Full command-line surface; returns the process exit code:
// 0 success, 1 a requested check failed, 2 bad arguments, 3 file problems,
// 4 numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace apcre
