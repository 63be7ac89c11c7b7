#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pavetex {

/// Runs the `pavetex` command line. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 computation error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pavetex
