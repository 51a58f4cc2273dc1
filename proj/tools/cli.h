#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace facegest::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2 };

// Runs the facegest command line. |args| excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace facegest::cli
