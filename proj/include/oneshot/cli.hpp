#pragma once

#include <iosfwd>

namespace oneshot {

/// Entry point of the `oneshot` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oneshot
