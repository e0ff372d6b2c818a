#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lobmkl {

// Entry point of the `lobmkl` tool. `args` excludes the program name.
// Returns the process exit status; diagnostics go to `err` as one line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lobmkl
