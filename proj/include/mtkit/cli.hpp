#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtkit::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInvalidInput = 2,
  kFlagConflict = 3,
  kIncompatible = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker threads for `simulate`: MTKIT_THREADS when it holds a positive
/// integer, else 1.
unsigned threads_from_env();

}  // namespace mtkit::cli
