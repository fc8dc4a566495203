#ifndef MUBINN_CLI_H_
#define MUBINN_CLI_H_

#include <iosfwd>

namespace mubinn {

// Entry point of the `mubinn` tool. Returns the process exit code; all
// output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace mubinn

#endif  // MUBINN_CLI_H_
