#pragma once

#include "hjbcli/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hjbcli {

enum ExitCode : int { exit_ok = 0, exit_nonconvergence = 2, exit_invalid_config = 3, exit_acceptance_failed = 4 };

struct RunFlags {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    double tol_scale = 1.0;
    double budget_scale = 1.0;
};

/// Subcommands: eigen, solve, tstar, branch, reproduce-example N, verify. `args` holds the
/// positional arguments after the subcommand. Diagnostics go to `err`, summaries to `out`,
/// and the machine-readable report to <out dir>/report.json.
int run(const std::string& subcommand, const std::vector<std::string>& args, const RunFlags& flags,
        std::ostream& out, std::ostream& err);

/// The canned scenario of reproduce-example `which` (1, 2 or 3).
Scenario example_scenario(int which);

}  // namespace hjbcli
