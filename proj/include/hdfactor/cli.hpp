#pragma once

namespace hdfactor::cli {

enum ExitCode : int {
  kSuccess = 0,
  kDomainFailure = 1,  // estimation / numerical precondition
  kIoFailure = 2,      // unreadable input, parse error, unwritable output
  kBadFlags = 3,
};

/// Entry point of the `hdfactor` command-line tool.
int run(int argc, const char* const* argv);

}  // namespace hdfactor::cli
