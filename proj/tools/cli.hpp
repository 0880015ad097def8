#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vbspool::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kPreconditionFailed = 3,
  kIoError = 4,
};

/// Runs the command line; output goes to `out` unless --out names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct Range {
  long lo = 0;
  long hi = 0;
  long step = 1;
};

/// Parses LO:HI[:STEP]; throws std::invalid_argument.
Range parse_range(const std::string& text);

/// printf %.12g
std::string format_number(double x);

}  // namespace vbspool::cli
