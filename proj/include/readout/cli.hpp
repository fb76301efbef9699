#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace readout::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

inline constexpr int kOutputSchemaVersion = 1;
inline constexpr const char* kSeedEnvVar = "READOUT_SEED";

// Runs one command line (args[0] is the program name). Human-readable output
// goes to `out`, diagnostics to `err`; JSON/CSV go to the --out paths.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace readout::cli
