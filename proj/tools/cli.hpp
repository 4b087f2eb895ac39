#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metric_forge::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitUsage = 1,
  kExitCertificateFailure = 2,
  kExitDegenerate = 3,
};

// Runs one command. args excludes the program name. The JSON report goes to
// `out`; human-readable diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metric_forge::cli
