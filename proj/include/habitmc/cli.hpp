#pragma once

#include <ostream>

namespace habitmc {

/// Entry point of the habitmc command. Returns the process exit code:
/// 0 success, 1 usage or config error, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace habitmc
