#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace coopgrow::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 runtime failure, 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coopgrow::cli
