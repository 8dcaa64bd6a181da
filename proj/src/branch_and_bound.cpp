#include "abmap/milp.hpp"

#include <chrono>
#include <cmath>
#include <array>
#include <queue>
#include <stdexcept>

#include "abmap/lp_solver.hpp"

namespace abmap {

namespace {

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::size_t id;
  double bound;
  std::vector<BoundChange> changes;
  std::vector<double> relaxation;
  SimplexBasis basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

// Index of the most fractional variable, or -1 if all are integral.
int branching_variable(const std::vector<double>& x) {
  int best = -1;
  double best_score = kIntegralityTol;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double frac = x[j] - std::floor(x[j]);
    const double score = std::min(frac, 1.0 - frac);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

std::string to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kTimeout: return "timeout";
  }
  return "unknown";
}

MilpResult solve_milp(const IntegerProgram& program, const MilpLimits& limits) {
  SimplexSolver lp(program);
  MilpResult result;
  const auto n = program.variables.size();
  std::vector<double> root_lower(n), root_upper(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Integral variables can have their bounds rounded inward.
    root_lower[j] = std::ceil(program.variables[j].lower - kIntegralityTol);
    root_upper[j] = std::floor(program.variables[j].upper + kIntegralityTol);
  }

  const auto start = std::chrono::steady_clock::now();
  auto budget_left = [&] {
    if (limits.node_limit != 0 && result.nodes_explored >= limits.node_limit) return false;
    if (limits.time_limit_seconds > 0) {
      std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
      if (spent.count() >= limits.time_limit_seconds) return false;
    }
    return true;
  };

  std::vector<double> lower, upper;
  SimplexBasis final_basis;
  auto solve_node = [&](const std::vector<BoundChange>& changes, const SimplexBasis& start) {
    lower = root_lower;
    upper = root_upper;
    for (const auto& c : changes) {
      lower[static_cast<std::size_t>(c.var)] = c.lower;
      upper[static_cast<std::size_t>(c.var)] = c.upper;
    }
    ++result.nodes_explored;
    LpSolution sol = lp.solve(lower, upper, start, &final_basis);
    result.lp_iterations += sol.iterations;
    return sol;
  };

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  std::size_t next_id = 0;
  double incumbent_value = -kInf;

  // Returns true when the node should stay open.
  auto consider = [&](std::vector<BoundChange> changes, LpSolution sol) {
    if (sol.status == LpStatus::kUnbounded) {
      throw std::runtime_error("integer program relaxation is unbounded");
    }
    if (sol.status != LpStatus::kOptimal) return;
    if (sol.objective <= incumbent_value + kPruneGap) return;
    if (branching_variable(sol.values) < 0) {
      std::vector<double> rounded(sol.values.size());
      for (std::size_t j = 0; j < rounded.size(); ++j) rounded[j] = std::round(sol.values[j]);
      if (point_violations(program, rounded, kIntegralityTol).empty()) {
        const double value = program.objective_value(rounded);
        if (value > incumbent_value) {
          incumbent_value = value;
          result.has_incumbent = true;
          result.incumbent = std::move(rounded);
          result.objective = value;
        }
      }
      return;
    }
    open.push(Node{next_id++, sol.objective, std::move(changes), std::move(sol.values), final_basis});
  };

  if (!budget_left()) {
    result.status = MilpStatus::kTimeout;
    result.bound = kInf;
    return result;
  }
  consider({}, solve_node({}, SimplexBasis{}));

  bool exhausted = true;
  while (!open.empty()) {
    if (open.top().bound <= incumbent_value + kPruneGap) {
      while (!open.empty()) open.pop();
      break;
    }
    Node node = open.top();
    open.pop();
    const int var = branching_variable(node.relaxation);
    const double v = node.relaxation[static_cast<std::size_t>(var)];
    double lo = root_lower[static_cast<std::size_t>(var)], hi = root_upper[static_cast<std::size_t>(var)];
    for (const auto& c : node.changes) {
      if (c.var == var) { lo = c.lower; hi = c.upper; }
    }

    const std::array<BoundChange, 2> children = {BoundChange{var, lo, std::floor(v)},
                                                 BoundChange{var, std::ceil(v), hi}};
    bool stopped = false;
    for (const auto& child : children) {
      if (!budget_left()) {
        stopped = true;
        break;
      }
      auto changes = node.changes;
      changes.push_back(child);
      LpSolution sol = solve_node(changes, node.basis);
      consider(std::move(changes), std::move(sol));
    }
    if (stopped) {
      open.push(std::move(node));
      exhausted = false;
      break;
    }
  }

  if (exhausted) {
    result.status = result.has_incumbent ? MilpStatus::kOptimal : MilpStatus::kInfeasible;
    result.bound = result.has_incumbent ? result.objective : -kInf;
    return result;
  }
  result.status = MilpStatus::kTimeout;
  result.bound = open.empty() ? incumbent_value : std::max(incumbent_value, open.top().bound);
  return result;
}

}  // namespace abmap
