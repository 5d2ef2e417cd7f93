#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wmforge::cli {

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2, kGateFailed = 3 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wmforge::cli
