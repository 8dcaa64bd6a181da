#pragma once

// Brute-force oracles and fixtures shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "abmap/core_model.hpp"
#include "abmap/integer_program.hpp"
#include "abmap/predprey.hpp"
#include "abmap/random.hpp"
#include "abmap/simulate.hpp"

namespace testing {

using namespace abmap;

// Every way to assign one event to each of the agents in `occupancy`,
// using the candidate events of each agent's state (multisets, no order).
inline std::vector<ModelEvent> all_model_events(const BehaviourModel& model, const StateMultiset& occupancy,
                                                bool partial = false) {
  std::vector<ModelEvent> out{ModelEvent{}};
  for (const auto& [s, n] : occupancy) {
    std::vector<EventId> options = model.events_of(s);
    std::vector<ModelEvent> next;
    // Multisets of size n (or up to n) over options.
    std::function<void(std::size_t, Count, ModelEvent&)> rec = [&](std::size_t k, Count left, ModelEvent& cur) {
      if (k == options.size()) {
        if (left == 0 || partial) {
          for (const auto& base : out) next.push_back(base + cur);
        }
        return;
      }
      for (Count take = 0; take <= left; ++take) {
        if (take > 0) cur.add(options[k], 1);
        rec(k + 1, left - take, cur);
      }
      for (Count take = 1; take <= left; ++take) cur.add(options[k], -1);
    };
    ModelEvent cur;
    rec(0, n, cur);
    out = std::move(next);
  }
  return out;
}

// Enumerates every trajectory in which each agent picks one of its state's
// events at every step (conditions not checked), plus optional injection
// choices. Calls `visit` for each.
inline void enumerate_trajectories(const BehaviourModel& model, const StateMultiset& initial, int horizon,
                                   const std::function<void(const Trajectory&)>& visit) {
  Trajectory traj{initial, {}};
  std::function<void(const StateMultiset&)> rec = [&](const StateMultiset& here) {
    if (static_cast<int>(traj.horizon()) == horizon) {
      visit(traj);
      return;
    }
    const int t = static_cast<int>(traj.horizon()) + 1;
    std::vector<EventId> injections;
    for (const auto& inj : model.injections()) {
      if (inj.timestep == t) injections.push_back(inj.event.id);
    }
    for (const auto& step : all_model_events(model, here)) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << injections.size()); ++mask) {
        ModelEvent full = step;
        for (std::size_t k = 0; k < injections.size(); ++k) {
          if (mask & (std::size_t{1} << k)) full.add(injections[k]);
        }
        traj.steps.push_back(full);
        rec(consequence(full, model));
        traj.steps.pop_back();
      }
    }
  };
  rec(initial);
}

// Best log-probability over feasible trajectories satisfying `obs`.
inline std::optional<double> brute_force_map(const BehaviourModel& model, const StateMultiset& initial,
                                             const std::vector<Observation>& obs, int horizon,
                                             std::size_t* feasible_count = nullptr) {
  std::optional<double> best;
  std::size_t count = 0;
  enumerate_trajectories(model, initial, horizon, [&](const Trajectory& traj) {
    if (!check_feasible(traj, model, Feasibility::kComplete).empty()) return;
    if (!satisfies(traj, obs, model).empty()) return;
    ++count;
    const double lp = log_probability(traj, model);
    if (!best || lp > *best) best = lp;
  });
  if (feasible_count) *feasible_count = count;
  return best;
}

// A three-state model that forks: A -> B (0.9) or C (0.1); B and C absorb.
inline BehaviourModel garden_path_model() {
  StateDomain d{3, {"A", "B", "C"}};
  std::vector<AgentEvent> ev;
  ev.push_back({0, 0, {}, {}, StateMultiset{{1, 1}}, 0.9, "A->B"});
  ev.push_back({1, 0, {}, {}, StateMultiset{{2, 1}}, 0.1, "A->C"});
  ev.push_back({2, 1, {}, {}, StateMultiset{{1, 1}}, 1.0, "B stays"});
  ev.push_back({3, 2, {}, {}, StateMultiset{{2, 1}}, 1.0, "C stays"});
  return BehaviourModel(d, ev);
}

// Interacting toy model over states {0: x, 1: y, 2: z}:
//   x moves to y if z is absent (0.5) / stays (0.3) / dies (0.2)  -- when z absent
//   x is converted to z when z is present (0.7) / stays (0.3)       -- when z present
//   y returns to x (0.6) or splits into x + y (0.4)
//   z dies (0.5) or stays (0.5)
inline BehaviourModel interacting_model() {
  StateDomain d{3, {"x", "y", "z"}};
  std::vector<AgentEvent> ev;
  ev.push_back({0, 0, {}, {2}, StateMultiset{{1, 1}}, 0.5, "x->y"});
  ev.push_back({1, 0, {}, {2}, StateMultiset{{0, 1}}, 0.3, "x stays"});
  ev.push_back({2, 0, {}, {2}, StateMultiset{}, 0.2, "x dies"});
  ev.push_back({3, 0, {2}, {}, StateMultiset{{2, 1}}, 0.7, "x->z"});
  ev.push_back({4, 0, {2}, {}, StateMultiset{{0, 1}}, 0.3, "x stays near z"});
  ev.push_back({5, 1, {}, {}, StateMultiset{{0, 1}}, 0.6, "y->x"});
  ev.push_back({6, 1, {}, {}, StateMultiset{{0, 1}, {1, 1}}, 0.4, "y splits"});
  ev.push_back({7, 2, {}, {}, StateMultiset{}, 0.5, "z dies"});
  ev.push_back({8, 2, {}, {}, StateMultiset{{2, 1}}, 0.5, "z stays"});
  return BehaviourModel(d, ev);
}

// Random integer program with small bounded variables.
inline IntegerProgram random_program(Rng& rng, int max_vars = 6, int max_bound = 3, int max_rows = 8) {
  IntegerProgram p;
  const int n = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_vars)));
  const int m = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_rows) + 1));
  for (int j = 0; j < n; ++j) {
    Variable v;
    v.name = "x" + std::to_string(j);
    v.lower = 0;
    v.upper = 1.0 + static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(max_bound)));
    v.objective = static_cast<double>(rng.uniform_index(11)) - 5.0;
    p.add_variable(v);
  }
  for (int r = 0; r < m; ++r) {
    Constraint c;
    c.name = "r" + std::to_string(r);
    double reach = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform01() < 0.6) {
        const double a = static_cast<double>(rng.uniform_index(9)) - 4.0;
        if (a != 0.0) {
          c.terms.push_back({j, a});
          reach += std::abs(a) * p.variables[static_cast<std::size_t>(j)].upper;
        }
      }
    }
    const double mid = std::floor((rng.uniform01() - 0.5) * reach);
    const int kind = static_cast<int>(rng.uniform_index(3));
    if (kind == 0) c.upper = mid + 1;
    else if (kind == 1) c.lower = mid - 1;
    else { c.lower = mid - 2; c.upper = mid + 2; }
    p.add_constraint(c);
  }
  return p;
}

// Exhaustive search over the integer box.
inline std::optional<double> enumerate_ip(const IntegerProgram& p) {
  const std::size_t n = p.variables.size();
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = p.variables[j].lower;
  std::optional<double> best;
  for (;;) {
    if (point_violations(p, x, 1e-9).empty()) {
      const double z = p.objective_value(x);
      if (!best || z > *best) best = z;
    }
    std::size_t j = 0;
    while (j < n && x[j] >= p.variables[j].upper) {
      x[j] = p.variables[j].lower;
      ++j;
    }
    if (j == n) break;
    x[j] += 1.0;
  }
  return best;
}

// Solves a small dense square system; false if singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// LP optimum by enumerating every vertex of the (bounded) feasible region:
// choose n linearly independent tight constraints among rows and bounds.
inline std::optional<double> lp_vertex_oracle(const IntegerProgram& p) {
  const std::size_t n = p.variables.size();
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const auto& c : p.constraints) {
    std::vector<double> a(n, 0.0);
    for (const auto& t : c.terms) a[static_cast<std::size_t>(t.var)] += t.coef;
    if (std::isfinite(c.lower)) { rows.push_back(a); rhs.push_back(c.lower); }
    if (std::isfinite(c.upper)) { rows.push_back(a); rhs.push_back(c.upper); }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> a(n, 0.0);
    a[j] = 1.0;
    if (std::isfinite(p.variables[j].lower)) { rows.push_back(a); rhs.push_back(p.variables[j].lower); }
    if (std::isfinite(p.variables[j].upper)) { rows.push_back(a); rhs.push_back(p.variables[j].upper); }
  }
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t from) {
    if (k == n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (std::size_t i : pick) { a.push_back(rows[i]); b.push_back(rhs[i]); }
      std::vector<double> x;
      if (!solve_dense(a, b, x)) return;
      if (!point_violations(p, x, 1e-8, false).empty()) return;
      const double z = p.objective_value(x);
      if (!best || z > *best) best = z;
      return;
    }
    for (std::size_t i = from; i < rows.size(); ++i) {
      pick[k] = i;
      rec(k + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Seeded predator-prey desk instance.
struct DeskInstance {
  predprey::Config config;
  BehaviourModel model;
  Trajectory real;
  std::vector<Observation> obs;
};

inline DeskInstance desk_instance(std::uint64_t seed, int grid, Count predators, Count prey, int horizon,
                                  double observe_prob) {
  predprey::Config cfg;
  cfg.grid_size = grid;
  BehaviourModel model = predprey::build_model(cfg);
  SimConfig sim;
  sim.seed = seed;
  sim.timesteps = horizon;
  sim.initial = UniformPlacement{grid, predators, prey};
  sim.observe_prob = observe_prob;
  Trajectory real = simulate(model, sim);
  auto obs = observe(real, model, observe_prob, derive_seed(seed, 1));
  return {cfg, std::move(model), std::move(real), std::move(obs)};
}

inline Count peak_population(const Trajectory& traj, const BehaviourModel& model) {
  Count peak = traj.initial.total();
  for (std::size_t t = 1; t <= traj.horizon(); ++t) peak = std::max(peak, states_at(traj, t, model).total());
  return peak;
}

}  // namespace testing
