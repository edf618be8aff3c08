#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cec {

/// Entry point behind the `cec` binary. `args` excludes the program name.
/// Returns 0 on success, 1 when a run fails and 2 on usage errors; failures
/// also print one JSON line {"error": kind, "message": ...} to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cec
