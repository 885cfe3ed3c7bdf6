#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcse::cli {

// Runs the command line `args` (without the program name). Returns the
// process exit status: 0 success, 1 hard error, 2 partial batch failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcse::cli
