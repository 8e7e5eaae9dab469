#pragma once

#include <iosfwd>

namespace potwell::cli {

/// Runs one command line (argv[0] is the program name). Exit status is 0
/// on success, 1 on failure and 2 when some windows had to be skipped.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace potwell::cli
