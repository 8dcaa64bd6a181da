#pragma once

// Exact branch-and-bound for pure integer programs over the simplex
// relaxation. Nodes are explored best-bound first (ties by creation order),
// branching on the most fractional variable (ties by lowest index) into the
// floor and ceiling subproblems. A node is pruned when its relaxation bound
// does not exceed the incumbent by more than 1e-9.

#include <cstddef>
#include <string>
#include <vector>

#include "abmap/integer_program.hpp"

namespace abmap {

inline constexpr double kIntegralityTol = 1e-6;
inline constexpr double kPruneGap = 1e-9;

enum class MilpStatus { kOptimal, kInfeasible, kTimeout };

struct MilpLimits {
  std::size_t node_limit = 0;     // 0 = unlimited
  double time_limit_seconds = 0;  // 0 = unlimited
};

struct MilpResult {
  MilpStatus status = MilpStatus::kInfeasible;
  bool has_incumbent = false;
  std::vector<double> incumbent;  // integral values when has_incumbent
  double objective = 0.0;
  std::size_t nodes_explored = 0;
  std::size_t lp_iterations = 0;
  double bound = 0.0;  // best remaining relaxation bound
};

MilpResult solve_milp(const IntegerProgram& program, const MilpLimits& limits = {});

std::string to_string(MilpStatus status);

}  // namespace abmap
