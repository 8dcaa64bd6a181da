#include "abmap/metrics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "abmap/predprey.hpp"
#include "abmap/random.hpp"

namespace abmap {

using predprey::CellState;
using predprey::Species;

int grid_size_of(const BehaviourModel& model) {
  const std::size_t size = model.domain().size;
  const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(size) / 2.0)));
  if (n < 1 || static_cast<std::size_t>(2 * n * n) != size) {
    throw std::invalid_argument("domain of size " + std::to_string(size) + " is not a predator-prey grid");
  }
  return n;
}

StateMultiset unobserved_states(const StateMultiset& occupancy, const std::vector<Observation>& obs, int t) {
  std::map<StateIndex, Count> seen;
  for (const auto& o : obs) {
    if (o.timestep != t || o.predicate.size() != 1) continue;
    Count& k = seen[o.predicate.front()];
    k = std::max(k, o.lower);
  }
  StateMultiset out = occupancy;
  for (const auto& [s, k] : seen) out.add(s, -std::min(k, out.count(s)));
  return out;
}

DistanceSample nearest_distance(const StateMultiset& from, const StateMultiset& to, int grid_size) {
  std::vector<CellState> targets[2];
  for (const auto& [s, n] : to) {
    (void)n;
    CellState c = predprey::decode_state(s, grid_size);
    targets[static_cast<int>(c.species)].push_back(c);
  }
  DistanceSample out;
  double sum = 0.0;
  for (const auto& [s, n] : from) {
    const CellState c = predprey::decode_state(s, grid_size);
    const auto& pool = targets[static_cast<int>(c.species)];
    if (pool.empty()) {
      out.skipped += static_cast<std::size_t>(n);
      continue;
    }
    int best = std::numeric_limits<int>::max();
    for (const auto& other : pool) best = std::min(best, predprey::torus_l1(c, other, grid_size));
    sum += static_cast<double>(best) * static_cast<double>(n);
    out.samples += static_cast<std::size_t>(n);
  }
  if (out.samples > 0) out.mean = sum / static_cast<double>(out.samples);
  return out;
}

namespace {

void check_time(const Trajectory& traj, int t) {
  if (t < 0 || static_cast<std::size_t>(t) > traj.horizon()) {
    throw std::out_of_range("timestep " + std::to_string(t) + " outside trajectory");
  }
}

}  // namespace

DistanceSample unobserved_distance(const Trajectory& real, const Trajectory& estimate,
                                   const std::vector<Observation>& obs, int t, const BehaviourModel& model) {
  check_time(real, t);
  check_time(estimate, t);
  const int n = grid_size_of(model);
  const auto tu = static_cast<std::size_t>(t);
  return nearest_distance(unobserved_states(states_at(estimate, tu, model), obs, t),
                          unobserved_states(states_at(real, tu, model), obs, t), n);
}

double random_baseline(const Trajectory& real, const std::vector<Observation>& obs, int t,
                       const BehaviourModel& model, std::size_t mc_samples, std::uint64_t seed) {
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be at least 1");
  check_time(real, t);
  const int n = grid_size_of(model);
  const StateMultiset hidden = unobserved_states(states_at(real, static_cast<std::size_t>(t), model), obs, t);
  Count per_species[2] = {0, 0};
  for (const auto& [s, k] : hidden) per_species[static_cast<int>(predprey::decode_state(s, n).species)] += k;

  Rng rng(seed);
  const auto cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    StateMultiset placed;
    for (int sp = 0; sp < 2; ++sp) {
      for (Count k = 0; k < per_species[sp]; ++k) {
        placed.add(static_cast<StateIndex>(static_cast<std::uint64_t>(sp) * cells + rng.uniform_index(cells)));
      }
    }
    DistanceSample d = nearest_distance(placed, hidden, n);
    if (d.samples == 0) continue;
    sum += d.mean;
    ++used;
  }
  return used ? sum / static_cast<double>(used) : 0.0;
}

double log_ratio(const Trajectory& candidate, const Trajectory& reference, const BehaviourModel& model) {
  return log_probability(candidate, model) - log_probability(reference, model);
}

std::vector<DistanceRow> distance_curve(const Trajectory& real, const Trajectory& estimate,
                                        const std::vector<Observation>& obs, const BehaviourModel& model,
                                        std::size_t mc_samples, std::uint64_t seed) {
  if (real.horizon() != estimate.horizon()) throw std::invalid_argument("trajectory horizons differ");
  std::vector<DistanceRow> rows;
  for (int t = 1; static_cast<std::size_t>(t) <= real.horizon(); ++t) {
    DistanceRow row;
    row.t = t;
    row.distance = unobserved_distance(real, estimate, obs, t, model);
    row.baseline = random_baseline(real, obs, t, model, mc_samples, derive_seed(seed, static_cast<std::uint64_t>(t)));
    rows.push_back(row);
  }
  return rows;
}

void write_metrics_csv(std::ostream& os, const std::vector<DistanceRow>& rows, double log_ratio) {
  const auto old_precision = os.precision(10);
  os << "t,mean_distance,n_samples,baseline\n";
  for (const auto& r : rows) {
    os << r.t << ',' << r.distance.mean << ',' << r.distance.samples << ',' << r.baseline << '\n';
  }
  os << "# log_ratio=" << log_ratio << '\n';
  os.precision(old_precision);
}

}  // namespace abmap
