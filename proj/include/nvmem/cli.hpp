#pragma once

#include <string>
#include <vector>

namespace nvmem {

// Command-line front end: run, parse-check, fit, sweep.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config/input error.
int run_cli(const std::vector<std::string>& args);

} // namespace nvmem
