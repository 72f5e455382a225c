// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qnnae::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kResourceError = 2,
};

/// Seed used when --seed is omitted.
inline constexpr unsigned long long kDefaultSeed = 42;

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`. Returns one of ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qnnae::cli
