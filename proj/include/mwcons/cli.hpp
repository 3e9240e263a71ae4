#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mwcons {

/// Entry point of the command-line tool; `args` excludes the program name.
/// Subcommands: check, params, run, compare. Returns the process exit code:
/// 0 success, 1 usage error, 2 scenario parse/validation failure, 3 runtime
/// failure (non-finite state, trigger runaway), 4 I/O failure.
int cli(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mwcons
