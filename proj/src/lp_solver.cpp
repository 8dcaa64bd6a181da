#include "abmap/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace abmap {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioPivotTol = 1e-7;  // smallest pivot a ratio test may pick
constexpr double kDropTol = 1e-14;
constexpr double kRatioTie = 1e-12;
constexpr double kDegenerateStep = 1e-12;
constexpr double kFinalFeasibility = 1e-7;
constexpr int kDegenerateRunForBland = 50;
constexpr std::size_t kRefactorInterval = 100;

}  // namespace

SimplexSolver::SimplexSolver(const IntegerProgram& program) {
  program.validate();
  n_ = static_cast<int>(program.variables.size());
  m_ = static_cast<int>(program.constraints.size());

  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n_));
  for (int r = 0; r < m_; ++r) {
    const auto& row = program.constraints[static_cast<std::size_t>(r)];
    for (const auto& t : row.terms) {
      if (t.coef != 0.0) cols[static_cast<std::size_t>(t.var)].emplace_back(r, t.coef);
    }
    row_lower_.push_back(row.lower);
    row_upper_.push_back(row.upper);
  }
  col_start_.push_back(0);
  for (auto& col : cols) {
    // Merge duplicate row entries within a column.
    std::stable_sort(col.begin(), col.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < col.size(); ++k) {
      if (!row_index_.empty() && static_cast<int>(row_index_.size()) > col_start_.back() &&
          row_index_.back() == col[k].first) {
        value_.back() += col[k].second;
      } else {
        row_index_.push_back(col[k].first);
        value_.push_back(col[k].second);
      }
    }
    col_start_.push_back(static_cast<int>(row_index_.size()));
  }
  for (const auto& v : program.variables) {
    cost_.push_back(-v.objective);
    default_lower_.push_back(v.lower);
    default_upper_.push_back(v.upper);
  }
}

LpSolution SimplexSolver::solve() { return solve(default_lower_, default_upper_); }

void SimplexSolver::load_column(int j, std::vector<double>& v) const {
  std::fill(v.begin(), v.end(), 0.0);
  if (j < n_) {
    for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
      v[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] = -value_[static_cast<std::size_t>(k)];
    }
  } else {
    v[static_cast<std::size_t>(j - n_)] = 1.0;  // (-I)^{-1} (-e_i)
  }
}

void SimplexSolver::ftran(std::vector<double>& v) const {
  for (std::size_t k = 0; k < eta_row_.size(); ++k) {
    const auto r = static_cast<std::size_t>(eta_row_[k]);
    if (v[r] == 0.0) continue;
    const double vr = v[r] / eta_pivot_[k];
    v[r] = vr;
    for (std::size_t p = eta_start_[k]; p < eta_start_[k + 1]; ++p) {
      v[static_cast<std::size_t>(eta_index_[p])] -= eta_value_[p] * vr;
    }
  }
}

void SimplexSolver::btran(std::vector<double>& y) const {
  for (std::size_t k = eta_row_.size(); k-- > 0;) {
    const auto r = static_cast<std::size_t>(eta_row_[k]);
    double s = y[r];
    for (std::size_t p = eta_start_[k]; p < eta_start_[k + 1]; ++p) {
      s -= y[static_cast<std::size_t>(eta_index_[p])] * eta_value_[p];
    }
    y[r] = s / eta_pivot_[k];
  }
  for (double& v : y) v = -v;
}

void SimplexSolver::push_eta(int row, const std::vector<double>& alpha) {
  eta_row_.push_back(row);
  eta_pivot_.push_back(alpha[static_cast<std::size_t>(row)]);
  for (int i = 0; i < m_; ++i) {
    if (i == row) continue;
    const double a = alpha[static_cast<std::size_t>(i)];
    if (std::abs(a) > kDropTol) {
      eta_index_.push_back(i);
      eta_value_.push_back(a);
    }
  }
  eta_start_.push_back(eta_index_.size());
}

void SimplexSolver::reset_basis() {
  const auto total = static_cast<std::size_t>(n_ + m_);
  head_.resize(static_cast<std::size_t>(m_));
  position_.assign(total, -1);
  status_.assign(total, Status::kAtLower);
  x_.assign(total, 0.0);
  for (int i = 0; i < m_; ++i) {
    head_[static_cast<std::size_t>(i)] = n_ + i;
    position_[static_cast<std::size_t>(n_ + i)] = i;
    status_[static_cast<std::size_t>(n_ + i)] = Status::kBasic;
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
    if (std::isfinite(lb_[j])) {
      status_[j] = Status::kAtLower;
      x_[j] = lb_[j];
    } else if (std::isfinite(ub_[j])) {
      status_[j] = Status::kAtUpper;
      x_[j] = ub_[j];
    } else {
      status_[j] = Status::kFree;
      x_[j] = 0.0;
    }
  }
  eta_row_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();
}

void SimplexSolver::recompute_basics() {
  // B x_B = -sum_{j nonbasic} a_j x_j, where logical columns are -e_i.
  std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (status_[ju] == Status::kBasic || x_[ju] == 0.0) continue;
    if (j < n_) {
      for (int k = col_start_[ju]; k < col_start_[ju + 1]; ++k) {
        rhs[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] -= value_[static_cast<std::size_t>(k)] * x_[ju];
      }
    } else {
      rhs[static_cast<std::size_t>(j - n_)] += x_[ju];
    }
  }
  for (double& v : rhs) v = -v;  // apply (-I)^{-1}
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = rhs[static_cast<std::size_t>(i)];
}

void SimplexSolver::reinvert() {
  std::vector<int> structurals;
  std::vector<char> available(static_cast<std::size_t>(m_), 1);
  for (int i = 0; i < m_; ++i) {
    int j = head_[static_cast<std::size_t>(i)];
    if (j < n_) structurals.push_back(j);
    else available[static_cast<std::size_t>(j - n_)] = 0;
  }
  std::sort(structurals.begin(), structurals.end(), [&](int a, int b) {
    int na = col_start_[static_cast<std::size_t>(a) + 1] - col_start_[static_cast<std::size_t>(a)];
    int nb = col_start_[static_cast<std::size_t>(b) + 1] - col_start_[static_cast<std::size_t>(b)];
    return na != nb ? na < nb : a < b;
  });

  eta_row_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();
  std::vector<int> new_head(static_cast<std::size_t>(m_));
  std::iota(new_head.begin(), new_head.end(), n_);
  std::fill(position_.begin(), position_.end(), -1);

  std::vector<double> v(static_cast<std::size_t>(m_));
  for (int j : structurals) {
    load_column(j, v);
    ftran(v);
    int best = -1;
    double best_abs = kPivotTol;
    for (int i = 0; i < m_; ++i) {
      if (!available[static_cast<std::size_t>(i)]) continue;
      double a = std::abs(v[static_cast<std::size_t>(i)]);
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    const auto ju = static_cast<std::size_t>(j);
    if (best < 0) {
      // Dependent column: drop it to a bound; its slot keeps the logical.
      if (std::isfinite(lb_[ju])) { status_[ju] = Status::kAtLower; x_[ju] = lb_[ju]; }
      else if (std::isfinite(ub_[ju])) { status_[ju] = Status::kAtUpper; x_[ju] = ub_[ju]; }
      else { status_[ju] = Status::kFree; x_[ju] = 0.0; }
      continue;
    }
    push_eta(best, v);
    available[static_cast<std::size_t>(best)] = 0;
    new_head[static_cast<std::size_t>(best)] = j;
  }
  // Unfilled slots keep their own logical, which becomes basic.
  head_ = new_head;
  for (int i = 0; i < m_; ++i) {
    const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
    position_[j] = i;
    status_[j] = Status::kBasic;
  }
  recompute_basics();
}

double SimplexSolver::reduced_cost(int j, const std::vector<double>& y) const {
  const auto ju = static_cast<std::size_t>(j);
  if (j >= n_) return y[static_cast<std::size_t>(j - n_)];
  double d = cost_[ju];
  for (int k = col_start_[ju]; k < col_start_[ju + 1]; ++k) {
    d -= y[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] * value_[static_cast<std::size_t>(k)];
  }
  return d;
}

double SimplexSolver::row_entry(int j, const std::vector<double>& rho) const {
  const auto ju = static_cast<std::size_t>(j);
  if (j >= n_) return -rho[static_cast<std::size_t>(j - n_)];
  double a = 0.0;
  for (int k = col_start_[ju]; k < col_start_[ju + 1]; ++k) {
    a += rho[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] * value_[static_cast<std::size_t>(k)];
  }
  return a;
}

// Dual simplex from a dual feasible basis. Boxed nonbasics with the wrong
// reduced-cost sign are moved to their other bound first; any other dual
// infeasibility abandons the phase.
SimplexSolver::DualOutcome SimplexSolver::dual_phase(std::size_t& iterations) {
  const int total = n_ + m_;
  std::vector<double> y(static_cast<std::size_t>(m_)), rho(static_cast<std::size_t>(m_)),
      alpha(static_cast<std::size_t>(m_)), d(static_cast<std::size_t>(total), 0.0);
  auto price = [&] {
    for (int i = 0; i < m_; ++i) {
      const int j = head_[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] = j < n_ ? cost_[static_cast<std::size_t>(j)] : 0.0;
    }
    btran(y);
    for (int j = 0; j < total; ++j) {
      d[static_cast<std::size_t>(j)] = status_[static_cast<std::size_t>(j)] == Status::kBasic ? 0.0 : reduced_cost(j, y);
    }
  };
  price();
  bool flipped = false;
  for (int j = 0; j < total; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const Status st = status_[ju];
    if (st == Status::kBasic || lb_[ju] == ub_[ju]) continue;
    const bool wrong = (st == Status::kAtLower && d[ju] < -kDualTol) || (st == Status::kAtUpper && d[ju] > kDualTol) ||
                       (st == Status::kFree && std::abs(d[ju]) > kDualTol);
    if (!wrong) continue;
    if (!std::isfinite(lb_[ju]) || !std::isfinite(ub_[ju])) return DualOutcome::kAbandoned;
    status_[ju] = st == Status::kAtLower ? Status::kAtUpper : Status::kAtLower;
    x_[ju] = status_[ju] == Status::kAtLower ? lb_[ju] : ub_[ju];
    flipped = true;
  }
  if (flipped) recompute_basics();

  const std::size_t limit = 20 * static_cast<std::size_t>(m_) + 1000;
  std::size_t since_refactor = 0;
  std::vector<std::pair<int, double>> candidates;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    if (since_refactor >= kRefactorInterval) {
      reinvert();
      price();
      since_refactor = 0;
    }
    // Leaving row: largest bound violation, ties by lowest position.
    int r = -1;
    double worst = kPrimalTol;
    for (int i = 0; i < m_; ++i) {
      const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
      const double viol = std::max(lb_[j] - x_[j], x_[j] - ub_[j]);
      if (viol > worst) {
        worst = viol;
        r = i;
      }
    }
    if (r < 0) return DualOutcome::kFeasible;
    ++iterations;
    const auto leaving = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
    const bool below = x_[leaving] < lb_[leaving];
    const double target = below ? lb_[leaving] : ub_[leaving];

    std::fill(rho.begin(), rho.end(), 0.0);
    rho[static_cast<std::size_t>(r)] = 1.0;
    btran(rho);

    // Harris ratio test: the largest |alpha_rj| among columns whose ratio
    // |d_j / alpha_rj| is within the dual tolerance of the minimum.
    std::vector<std::pair<int, double>>& cand = candidates;
    cand.clear();
    double bound = kInf;
    for (int j = 0; j < total; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const Status st = status_[ju];
      if (st == Status::kBasic || lb_[ju] == ub_[ju]) continue;
      const double a = row_entry(j, rho);
      if (std::abs(a) < kRatioPivotTol) continue;
      // x_Br moves by -a per unit increase of x_j.
      bool ok;
      if (st == Status::kFree) ok = true;
      else if (st == Status::kAtLower) ok = below ? a < 0.0 : a > 0.0;
      else ok = below ? a > 0.0 : a < 0.0;
      if (!ok) continue;
      cand.emplace_back(j, a);
      bound = std::min(bound, (std::abs(d[ju]) + kDualTol) / std::abs(a));
    }
    if (cand.empty()) {
      if (since_refactor == 0) return DualOutcome::kInfeasible;
      // Confirm on a fresh factorization.
      reinvert();
      price();
      since_refactor = 0;
      continue;
    }
    int q = -1;
    double best_alpha = 0.0;
    for (const auto& [j, a] : cand) {
      if (std::abs(d[static_cast<std::size_t>(j)]) / std::abs(a) > bound) continue;
      if (std::abs(a) > std::abs(best_alpha)) {
        q = j;
        best_alpha = a;
      }
    }

    const auto qu = static_cast<std::size_t>(q);
    load_column(q, alpha);
    ftran(alpha);
    const double a_rq = alpha[static_cast<std::size_t>(r)];
    if (std::abs(a_rq - best_alpha) > 1e-7 * (1.0 + std::abs(a_rq))) {
      // Row and column disagree: the factorization has drifted.
      if (since_refactor == 0) return DualOutcome::kAbandoned;
      reinvert();
      price();
      since_refactor = 0;
      continue;
    }
    const double delta = (x_[leaving] - target) / a_rq;
    x_[qu] += delta;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[static_cast<std::size_t>(i)];
      if (a != 0.0) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= a * delta;
    }
    x_[leaving] = target;

    const double theta = d[qu] / a_rq;
    for (int j = 0; j < total; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (status_[ju] == Status::kBasic || lb_[ju] == ub_[ju]) continue;
      if (j == q) continue;
      const double a = row_entry(j, rho);
      if (a != 0.0) d[ju] -= theta * a;
    }
    d[qu] = 0.0;
    d[leaving] = -theta;

    status_[leaving] = below ? Status::kAtLower : Status::kAtUpper;
    position_[leaving] = -1;
    head_[static_cast<std::size_t>(r)] = q;
    position_[qu] = r;
    status_[qu] = Status::kBasic;
    push_eta(r, alpha);
    ++since_refactor;
  }
  return DualOutcome::kAbandoned;
}

bool SimplexSolver::primal_infeasible(int j, double tol) const {
  const auto ju = static_cast<std::size_t>(j);
  return x_[ju] < lb_[ju] - tol || x_[ju] > ub_[ju] + tol;
}

LpSolution SimplexSolver::solve(std::span<const double> lower, std::span<const double> upper) {
  return solve(lower, upper, SimplexBasis{}, nullptr);
}

void SimplexSolver::load_basis(const SimplexBasis& basis) {
  reset_basis();
  const auto total = static_cast<std::size_t>(n_ + m_);
  if (basis.head.size() != static_cast<std::size_t>(m_) || basis.at_upper.size() != total) {
    throw std::invalid_argument("basis does not match the program");
  }
  std::fill(position_.begin(), position_.end(), -1);
  for (int i = 0; i < m_; ++i) {
    const int j = basis.head[static_cast<std::size_t>(i)];
    if (j < 0 || j >= n_ + m_ || position_[static_cast<std::size_t>(j)] >= 0) {
      throw std::invalid_argument("malformed basis");
    }
    head_[static_cast<std::size_t>(i)] = j;
    position_[static_cast<std::size_t>(j)] = i;
  }
  for (std::size_t j = 0; j < total; ++j) {
    if (position_[j] >= 0) {
      status_[j] = Status::kBasic;
      continue;
    }
    const bool upper = basis.at_upper[j] != 0;
    if (std::isfinite(ub_[j]) && (upper || !std::isfinite(lb_[j]))) {
      status_[j] = Status::kAtUpper;
      x_[j] = ub_[j];
    } else if (std::isfinite(lb_[j])) {
      status_[j] = Status::kAtLower;
      x_[j] = lb_[j];
    } else {
      status_[j] = Status::kFree;
      x_[j] = 0.0;
    }
  }
  reinvert();
}

LpSolution SimplexSolver::solve(std::span<const double> lower, std::span<const double> upper,
                                const SimplexBasis& start, SimplexBasis* final_basis) {
  if (lower.size() != static_cast<std::size_t>(n_) || upper.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("bound vectors must match the variable count");
  }
  LpSolution out;
  const auto total = static_cast<std::size_t>(n_ + m_);
  lb_.assign(total, 0.0);
  ub_.assign(total, 0.0);
  for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
    lb_[j] = lower[j];
    ub_[j] = upper[j];
    if (lb_[j] > ub_[j]) return out;
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(m_); ++i) {
    lb_[static_cast<std::size_t>(n_) + i] = row_lower_[i];
    ub_[static_cast<std::size_t>(n_) + i] = row_upper_[i];
    if (row_lower_[i] > row_upper_[i]) return out;
  }

  std::size_t dual_iterations = 0;
  if (start.empty()) {
    reset_basis();
    recompute_basics();
  } else {
    load_basis(start);
    switch (dual_phase(dual_iterations)) {
      case DualOutcome::kInfeasible:
        out.iterations = dual_iterations;
        return out;
      case DualOutcome::kAbandoned:
        reset_basis();
        recompute_basics();
        break;
      case DualOutcome::kFeasible:
        break;
    }
  }

  std::vector<double> y(static_cast<std::size_t>(m_));
  std::vector<double> alpha(static_cast<std::size_t>(m_));
  std::vector<double> basic_cost(static_cast<std::size_t>(m_));
  std::size_t since_refactor = 0;
  int degenerate_run = 0;
  int final_checks = 0;
  const std::size_t max_iterations = 100 * static_cast<std::size_t>(n_ + m_) + 10000;

  for (std::size_t iter = dual_iterations;; ++iter) {
    if (iter > max_iterations + dual_iterations) {
      if (!start.empty()) {
        // Warm start went astray; one cold attempt.
        LpSolution cold = solve(lower, upper, SimplexBasis{}, final_basis);
        cold.iterations += iter;
        return cold;
      }
      throw std::runtime_error("simplex: iteration limit exceeded");
    }
    if (since_refactor >= kRefactorInterval) {
      reinvert();
      since_refactor = 0;
    }

    bool phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[static_cast<std::size_t>(i)];
      const auto ju = static_cast<std::size_t>(j);
      double c = 0.0;
      if (x_[ju] < lb_[ju] - kPrimalTol) c = -1.0;
      else if (x_[ju] > ub_[ju] + kPrimalTol) c = 1.0;
      if (c != 0.0) phase1 = true;
      basic_cost[static_cast<std::size_t>(i)] = c;
    }
    if (!phase1) {
      for (int i = 0; i < m_; ++i) {
        const int j = head_[static_cast<std::size_t>(i)];
        basic_cost[static_cast<std::size_t>(i)] = j < n_ ? cost_[static_cast<std::size_t>(j)] : 0.0;
      }
    }
    y = basic_cost;
    btran(y);

    // Pricing.
    const bool bland = degenerate_run >= kDegenerateRunForBland;
    int entering = -1;
    double entering_d = 0.0, best_score = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const Status st = status_[ju];
      if (st == Status::kBasic) continue;
      if (lb_[ju] == ub_[ju]) continue;
      double d;
      if (j < n_) {
        d = phase1 ? 0.0 : cost_[ju];
        for (int k = col_start_[ju]; k < col_start_[ju + 1]; ++k) {
          d -= y[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] * value_[static_cast<std::size_t>(k)];
        }
      } else {
        d = y[static_cast<std::size_t>(j - n_)];
      }
      bool eligible = (st == Status::kAtLower && d < -kDualTol) || (st == Status::kAtUpper && d > kDualTol) ||
                      (st == Status::kFree && std::abs(d) > kDualTol);
      if (!eligible) continue;
      if (bland) {
        entering = j;
        entering_d = d;
        break;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        entering = j;
        entering_d = d;
      }
    }

    if (entering < 0) {
      if (phase1) {
        out.status = LpStatus::kInfeasible;
        out.iterations = iter;
        return out;
      }
      // Confirm with a fresh factorization before declaring optimality.
      if (final_checks < 2 && !eta_row_.empty()) {
        ++final_checks;
        reinvert();
        since_refactor = 0;
        bool clean = true;
        for (int i = 0; i < m_; ++i) {
          if (primal_infeasible(head_[static_cast<std::size_t>(i)], kPrimalTol)) clean = false;
        }
        if (!clean) continue;
      }
      out.status = LpStatus::kOptimal;
      out.iterations = iter;
      out.values.assign(x_.begin(), x_.begin() + n_);
      for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
        double& v = out.values[j];
        if (v < lb_[j]) v = lb_[j];
        if (v > ub_[j]) v = ub_[j];
        out.objective -= cost_[j] * v;
      }
      for (int i = 0; i < m_; ++i) {
        if (primal_infeasible(head_[static_cast<std::size_t>(i)], kFinalFeasibility)) {
          throw std::runtime_error("simplex: optimal basis violates feasibility tolerance");
        }
      }
      if (final_basis) {
        final_basis->head = head_;
        final_basis->at_upper.resize(total);
        for (std::size_t j = 0; j < total; ++j) final_basis->at_upper[j] = status_[j] == Status::kAtUpper;
      }
      return out;
    }

    const double dir = entering_d < 0.0 ? 1.0 : -1.0;
    load_column(entering, alpha);
    ftran(alpha);

    // Ratio test.
    const auto eu = static_cast<std::size_t>(entering);
    double theta = kInf;
    int leave = -1;
    double leave_target = 0.0, leave_pivot = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[static_cast<std::size_t>(i)];
      if (std::abs(a) < kRatioPivotTol) continue;
      const double rate = -dir * a;
      const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
      const double v = x_[j], l = lb_[j], u = ub_[j];
      double target;
      if (rate < 0.0) {
        if (v > u + kPrimalTol) target = u;
        else if (std::isfinite(l) && v >= l - kPrimalTol) target = l;
        else continue;
      } else {
        if (v < l - kPrimalTol) target = l;
        else if (std::isfinite(u) && v <= u + kPrimalTol) target = u;
        else continue;
      }
      double t = (target - v) / rate;
      if (t < 0.0) t = 0.0;
      bool take;
      if (leave < 0 || t < theta - kRatioTie) {
        take = true;
      } else if (t <= theta + kRatioTie) {
        const int cand = head_[static_cast<std::size_t>(i)];
        const int cur = head_[static_cast<std::size_t>(leave)];
        if (bland) take = cand < cur;
        else take = std::abs(a) > std::abs(leave_pivot) || (std::abs(a) == std::abs(leave_pivot) && cand < cur);
      } else {
        take = false;
      }
      if (take) {
        theta = leave < 0 ? t : std::min(theta, t);
        leave = i;
        leave_target = target;
        leave_pivot = a;
      }
    }
    const double flip = std::isfinite(lb_[eu]) && std::isfinite(ub_[eu]) ? ub_[eu] - lb_[eu] : kInf;

    if (leave < 0 && !std::isfinite(flip)) {
      if (phase1) throw std::runtime_error("simplex: phase 1 ray without blocking variable");
      out.status = LpStatus::kUnbounded;
      out.iterations = iter;
      return out;
    }

    const bool do_flip = leave < 0 || flip <= theta;
    const double step = do_flip ? flip : theta;
    degenerate_run = step <= kDegenerateStep ? degenerate_run + 1 : 0;

    if (step != 0.0) {
      x_[eu] += dir * step;
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[static_cast<std::size_t>(i)];
        if (a != 0.0) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= dir * a * step;
      }
    }
    if (do_flip) {
      if (dir > 0) { status_[eu] = Status::kAtUpper; x_[eu] = ub_[eu]; }
      else { status_[eu] = Status::kAtLower; x_[eu] = lb_[eu]; }
      continue;
    }

    const auto lu = static_cast<std::size_t>(head_[static_cast<std::size_t>(leave)]);
    x_[lu] = leave_target;
    status_[lu] = leave_target == lb_[lu] ? Status::kAtLower : Status::kAtUpper;
    position_[lu] = -1;
    head_[static_cast<std::size_t>(leave)] = entering;
    position_[eu] = leave;
    status_[eu] = Status::kBasic;
    push_eta(leave, alpha);
    ++since_refactor;
  }
}

LpSolution solve_lp(const IntegerProgram& program) { return SimplexSolver(program).solve(); }

LpSolution solve_lp(const IntegerProgram& program, std::span<const double> lower,
                    std::span<const double> upper) {
  return SimplexSolver(program).solve(lower, upper);
}

}  // namespace abmap
