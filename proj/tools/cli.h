#pragma once

#include <iosfwd>

namespace agc::cli {

// Parses argv and runs one subcommand. Returns the process exit status:
// 0 on success, 1 on a runtime error, CLI11's code on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agc::cli
