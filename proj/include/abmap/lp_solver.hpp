#pragma once

// Linear relaxation solver for IntegerProgram.
//
// Bounded-variable revised primal simplex. Every row gets a logical variable
// s_r = a_r'x carrying the row bounds, so the working system is [A | -I] with
// box bounds on all n + m variables. The basis inverse is kept in product
// form (eta file) on top of the all-logical basis and rebuilt periodically.
// Phase 1 minimizes the sum of bound violations of the basic variables.
//
// A warm-started solve first runs the dual simplex from the given basis,
// which stays dual feasible when only variable bounds changed, and then
// hands over to the primal loop to confirm optimality.
//
// Pricing is Dantzig's rule with ties broken by lowest index. After a run of
// degenerate pivots the solver switches to Bland's rule (lowest eligible
// entering index, lowest-index leaving variable among ratio ties) until a
// non-degenerate pivot occurs.

#include <cstddef>
#include <span>
#include <vector>

#include "abmap/integer_program.hpp"

namespace abmap {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;  // structural values; empty unless optimal
  double objective = 0.0;      // in the program's maximization sense
  std::size_t iterations = 0;
};

/// Basis snapshot used to warm-start a later solve of the same program.
struct SimplexBasis {
  std::vector<int> head;                 // basic variable per row position
  std::vector<unsigned char> at_upper;  // nonbasic variables resting at their upper bound
  bool empty() const { return head.empty(); }
};

class SimplexSolver {
 public:
  explicit SimplexSolver(const IntegerProgram& program);

  /// Solves with the program's own variable bounds.
  LpSolution solve();
  /// Solves with overriding variable bounds (sizes must equal the variable
  /// count). Lower bounds must be finite unless the upper bound is.
  LpSolution solve(std::span<const double> lower, std::span<const double> upper);
  /// Same, starting from `start` (if non-empty) and storing the final basis
  /// in `final_basis` (if non-null) when optimal.
  LpSolution solve(std::span<const double> lower, std::span<const double> upper, const SimplexBasis& start,
                   SimplexBasis* final_basis);

  std::size_t rows() const { return static_cast<std::size_t>(m_); }
  std::size_t columns() const { return static_cast<std::size_t>(n_); }

 private:
  enum class Status : unsigned char { kBasic, kAtLower, kAtUpper, kFree };

  void reset_basis();
  void load_basis(const SimplexBasis& basis);
  void reinvert();
  void recompute_basics();
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& y) const;
  void load_column(int j, std::vector<double>& v) const;
  void push_eta(int row, const std::vector<double>& alpha);
  bool primal_infeasible(int j, double tol) const;
  enum class DualOutcome { kFeasible, kInfeasible, kAbandoned };
  DualOutcome dual_phase(std::size_t& iterations);
  double reduced_cost(int j, const std::vector<double>& y) const;
  double row_entry(int j, const std::vector<double>& rho) const;

  int m_ = 0;
  int n_ = 0;
  std::vector<int> col_start_;
  std::vector<int> row_index_;
  std::vector<double> value_;
  std::vector<double> cost_;  // minimization costs of structurals
  std::vector<double> row_lower_, row_upper_;
  std::vector<double> default_lower_, default_upper_;

  // Working state, sized n + m.
  std::vector<double> lb_, ub_, x_;
  std::vector<Status> status_;
  std::vector<int> head_;      // basic variable of each row position
  std::vector<int> position_;  // row position of basic variables, -1 otherwise

  // Eta file: B = (-I) E_1 ... E_k.
  std::vector<int> eta_row_;
  std::vector<double> eta_pivot_;
  std::vector<std::size_t> eta_start_;
  std::vector<int> eta_index_;
  std::vector<double> eta_value_;
};

LpSolution solve_lp(const IntegerProgram& program);
LpSolution solve_lp(const IntegerProgram& program, std::span<const double> lower,
                    std::span<const double> upper);

}  // namespace abmap
