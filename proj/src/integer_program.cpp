#include "abmap/integer_program.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace abmap {

void IntegerProgram::validate() const {
  const int n = static_cast<int>(variables.size());
  for (const auto& v : variables) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw std::invalid_argument("variable " + v.name + " has invalid bounds");
    }
    if (v.kind == VarKind::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw std::invalid_argument("binary variable " + v.name + " has bounds outside [0, 1]");
    }
    if (!std::isfinite(v.objective)) {
      throw std::invalid_argument("variable " + v.name + " has a non-finite objective");
    }
  }
  for (const auto& c : constraints) {
    if (std::isnan(c.lower) || std::isnan(c.upper)) {
      throw std::invalid_argument("row " + c.name + " has NaN bounds");
    }
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= n) throw std::invalid_argument("row " + c.name + " references unknown variable");
      if (!std::isfinite(t.coef)) throw std::invalid_argument("row " + c.name + " has a non-finite coefficient");
    }
  }
}

double IntegerProgram::objective_value(std::span<const double> x) const {
  double z = 0.0;
  for (std::size_t j = 0; j < variables.size(); ++j) z += variables[j].objective * x[j];
  return z;
}

std::vector<std::string> point_violations(const IntegerProgram& program, std::span<const double> x,
                                          double tol, bool check_integrality) {
  std::vector<std::string> out;
  if (x.size() != program.variables.size()) {
    out.push_back("point has wrong dimension");
    return out;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& v = program.variables[j];
    if (x[j] < v.lower - tol || x[j] > v.upper + tol) {
      std::ostringstream os;
      os << v.name << " = " << x[j] << " outside bounds";
      out.push_back(os.str());
    }
    if (check_integrality && std::abs(x[j] - std::round(x[j])) > tol) {
      std::ostringstream os;
      os << v.name << " = " << x[j] << " not integral";
      out.push_back(os.str());
    }
  }
  for (const auto& c : program.constraints) {
    double a = 0.0;
    for (const auto& t : c.terms) a += t.coef * x[static_cast<std::size_t>(t.var)];
    if (a < c.lower - tol || a > c.upper + tol) {
      std::ostringstream os;
      os << "row " << c.name << " activity " << a << " outside [" << c.lower << ", " << c.upper << "]";
      out.push_back(os.str());
    }
  }
  return out;
}

}  // namespace abmap
