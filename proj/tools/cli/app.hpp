#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace witsopt::cli {

/// Parses argv-style arguments (args[0] is the program name), runs the
/// selected subcommand and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace witsopt::cli
