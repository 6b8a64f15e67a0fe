#pragma once

#include <iosfwd>

namespace vbpi {

// Runs the vbpimix command line. Results go to `out`; failures print one line
// "error: <kind>: <message>" to `err` and return a nonzero exit code.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vbpi
