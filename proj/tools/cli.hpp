#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace docasd::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kScorerUnavailable = 3,
};

// Runs the docasd command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace docasd::cli
