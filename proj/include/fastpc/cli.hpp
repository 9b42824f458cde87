#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fastpc::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_usage = 2,
  exit_validation = 3,
  exit_numerical = 4,
};

/// Runs one command line (args excludes the program name). Errors are
/// reported as a single "fastpc: error: <kind>: <message>" line on err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

/// Root for run output when --out is not given: $FASTPC_OUT, else "out".
std::string default_output_root();

/// "a,b,c" or "start:stop:step" (inclusive stop).
std::vector<double> parse_values(const std::string& text);

}  // namespace fastpc::cli
