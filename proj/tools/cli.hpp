#pragma once

// Command-line front end. `run` takes the arguments after the program name and
// returns the process exit code: 0 when the check passes, 1 when it fails or
// the computation breaks down, 2 on a usage or configuration error.

#include <iosfwd>
#include <string>
#include <vector>

namespace caustica::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace caustica::cli
