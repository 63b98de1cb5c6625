#pragma once

#include <iosfwd>

namespace conic {

/// Exit codes: 0 check passed, 1 check failed (certificate emitted),
/// 2 input or parameter error, 3 internal cross-check failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conic
