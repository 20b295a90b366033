#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace harp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,    // bad flags or configuration
  kRuntime = 3,  // numerical or runtime failure
  kFormat = 4,   // unreadable or malformed files
};

/// Runs one command; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace harp::cli
