#pragma once

#include <string>
#include <vector>

namespace adpcm::cli {

// Entry point shared by the binary and the tests. args excludes the program
// name (subcommand first). Returns the process exit code.
int run(const std::vector<std::string>& args);

} // namespace adpcm::cli
