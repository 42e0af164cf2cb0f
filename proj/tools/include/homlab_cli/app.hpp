#pragma once

#include <ostream>

namespace homlab::cli {

// Exit codes: 0 success, 1 config error, 2 numeric failure, 3 unconverged index.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace homlab::cli
