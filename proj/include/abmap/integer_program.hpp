#pragma once

// Pure integer linear programs in row-bounded form:
//
//   maximize    c'x
//   subject to  lo_r <= a_r'x <= hi_r   for every row r
//               lx <= x <= ux,  x integral
//
// Infinite bounds are represented with +/- kInf.

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace abmap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { kInteger, kBinary };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::kInteger;
  double objective = 0.0;
};

struct Term {
  int var = 0;
  double coef = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  double lower = -kInf;
  double upper = kInf;
};

struct IntegerProgram {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;

  int add_variable(Variable v) {
    variables.push_back(std::move(v));
    return static_cast<int>(variables.size()) - 1;
  }
  void add_constraint(Constraint c) { constraints.push_back(std::move(c)); }

  /// Throws std::invalid_argument on out-of-range variable references,
  /// inverted bounds, or binary variables whose bounds exceed [0, 1].
  void validate() const;

  double objective_value(std::span<const double> x) const;
};

/// Human-readable descriptions of every bound, row or integrality violation of
/// `x` beyond `tol`.
std::vector<std::string> point_violations(const IntegerProgram& program, std::span<const double> x,
                                          double tol = 1e-7, bool check_integrality = true);

}  // namespace abmap
