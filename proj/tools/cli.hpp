#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tslab::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kProblemError = 3 };

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tslab::cli
