// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpp::bench {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitContract = 2, kExitNumeric = 3, kExitIo = 4 };

/// Runs `dppbench` with args (program name excluded) and returns the exit
/// code. Errors are reported on `err`, never thrown.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpp::bench
