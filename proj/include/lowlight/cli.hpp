#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lowlight::cli {

enum ExitCode : int {
    kOk = 0,
    kInvalidInput = 1,
    kNumericFailure = 2,
};

/// Runs one command line; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace lowlight::cli
