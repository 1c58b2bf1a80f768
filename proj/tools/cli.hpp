#pragma once

#include <ostream>

namespace clickstream::cli {

/// Exit codes: 0 success, 1 data or config error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clickstream::cli
