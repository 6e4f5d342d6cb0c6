#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace threshlasso::cli {

/// Exit codes: 0 success, 1 input error, 2 estimation error. Errors are one
/// line on `err`, prefixed with "error: ".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with args[0] the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace threshlasso::cli
