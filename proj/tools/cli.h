#pragma once

#include <iosfwd>

namespace chartpipe {

/// Entry point of the `chartpipe` tool. Exit codes: 0 success, 1 runtime
/// failure (JSON error on `err`), 2 bad usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chartpipe
