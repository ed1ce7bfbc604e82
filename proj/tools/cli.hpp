#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace delaystab::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 2,      // bad arguments, schema, CFL, ...
    kExitNumerical = 3,  // certification failure, blow-up, too many invalid cells
};

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace delaystab::cli
