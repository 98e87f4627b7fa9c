#pragma once

#include <iosfwd>

namespace fieldsim::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kUnknownSeries = 4,
  kBindFailure = 5,
};

// Entry point behind the `fieldsim` binary. Human-readable output goes to
// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fieldsim::cli
