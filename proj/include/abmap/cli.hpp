#pragma once

// Command-line front end: simulate, assimilate, stream, export-lp, metrics.

#include <iosfwd>
#include <string>
#include <vector>

namespace abmap::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kInfeasible = 3,
  kBudgetExceeded = 4,
};

/// Environment variable holding the branch-and-bound node budget.
inline constexpr const char* kNodeLimitEnv = "ABMAP_NODE_LIMIT";

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace abmap::cli
