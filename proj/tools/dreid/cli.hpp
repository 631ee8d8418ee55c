#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dreid::cli {

/// Parses `args` (without the program name), runs the chosen subcommand and
/// returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dreid::cli
