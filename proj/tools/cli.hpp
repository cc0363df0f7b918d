#pragma once

#include <iosfwd>

namespace hfwlab {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the hfwlab tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hfwlab
