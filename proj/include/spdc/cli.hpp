#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spdc {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;     // config, schema or domain error
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

// Runs the command line `argv` (argv[0] is the program name). Results go to
// `out` unless an output path is configured; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spdc
