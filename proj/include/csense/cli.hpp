#pragma once

#include <string>
#include <vector>

namespace csense {

// Full command-line driver: train / eval / sweep / gradcheck. `args` excludes
// the program name. Returns the process exit code: 0 on success, 2 for usage
// and configuration errors, 1 for runtime failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace csense
