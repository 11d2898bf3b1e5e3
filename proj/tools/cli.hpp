#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace exobench::cli {

enum ExitCode { kOk = 0, kDomainFailure = 1, kIoFailure = 2 };

// Runs one command line (args excludes the program name). Normal output goes
// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace exobench::cli
