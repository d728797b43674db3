#pragma once

#include <iosfwd>

namespace mfcal {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitSkipped = 4,
};

/// Entry point of the `mfcal` tool:
///   calibrate  --config FILE [--low CSV] [--high CSV] [--seed N]
///   optimize   --config FILE [--calibration JSON] [--seed N] [--collapse-variance]
///   benchmark  --scenario illustrative|mse-study|cure-surrogate [--n-datasets N] ...
///   generate   --scenario illustrative|cure-surrogate --out-dir DIR [--seed N]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfcal
