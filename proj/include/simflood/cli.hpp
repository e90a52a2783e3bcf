#pragma once

#include <iosfwd>

namespace simflood {

/// Entry point of the `simflood` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simflood
