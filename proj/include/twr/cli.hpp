#pragma once

#include <iosfwd>

namespace twr::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
    kSuccess = 0,  // success, or the gesture matched
    kNegative = 1, // clean negative: no match, or replay mismatches
    kError = 2,    // usage or input error
};

/// Entry point behind the `twr` executable; output goes to the given streams.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace twr::cli
