#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fscil::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

/// Entry point shared by the `fscil` binary and the CLI tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fscil::cli
