#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace yamabe::cli {

enum ExitCode : int { ok = 0, acceptance_failed = 1, usage_error = 2, numerical_failure = 3 };

/// Whole command line, argv[0] excluded. Never throws; returns an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace yamabe::cli
