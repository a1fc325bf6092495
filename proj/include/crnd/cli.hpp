#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crnd {

enum ExitCode { kExitOk = 0, kExitDomain = 1, kExitUsage = 2 };

/// Runs one command line (argv[0] included). JSON goes to `out`, the
/// summary and diagnostics to `err`.
int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace crnd
