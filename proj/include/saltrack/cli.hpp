#pragma once

#include <string>
#include <vector>

namespace saltrack {

/// Entry point behind the binary: `train | detect | track | eval`.
/// Returns 0 on success, 1 on usage errors, 2 on runtime errors;
/// diagnostics go to stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace saltrack
