#pragma once

#include <string>
#include <vector>

namespace synet {

// Entry point shared by the binary and the tests. `args` excludes argv[0].
// Exit codes: 0 success, 1 runtime failure, 2 usage/schema error,
// 3 missing input.
int run_cli(const std::vector<std::string>& args);

}  // namespace synet
