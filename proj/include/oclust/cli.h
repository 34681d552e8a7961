#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oclust::cli {

inline constexpr const char* kVersion = "1.0.0";

// Bad flag combinations or inputs that the command cannot accept (exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs one command line (without the program name). Returns the process
// exit code: 0 success, 1 usage error, 2 data error. Streamed command
// output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "4..8" or "6" -> inclusive range.
std::pair<int, int> parse_range(const std::string& text);

}  // namespace oclust::cli
