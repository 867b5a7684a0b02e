#pragma once

#include <string>
#include <vector>

namespace rcc {

// Runs one CLI invocation; args excludes the program name. Returns 0 on
// success, 1 on usage errors, 2 on data errors. Diagnostics go to stderr.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace rcc
