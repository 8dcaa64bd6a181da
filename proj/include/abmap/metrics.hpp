#pragma once

// Quality measures for predator-prey assimilation runs.
//
// "Unobserved" agents are what is left of a state's occupancy after removing
// the count reported by single-state observations at that time. Distances
// are torus-L1 from each unobserved estimate agent to the nearest unobserved
// real agent of the same species.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "abmap/core_model.hpp"

namespace abmap {

struct DistanceSample {
  double mean = 0.0;         // 0 when samples == 0
  std::size_t samples = 0;   // estimate agents with a same-species real partner
  std::size_t skipped = 0;   // estimate agents without one
};

/// Grid side N of a predator-prey domain (size 2 N^2).
int grid_size_of(const BehaviourModel& model);

/// Occupancy at t minus the largest single-state lower bound observed there.
StateMultiset unobserved_states(const StateMultiset& occupancy, const std::vector<Observation>& obs, int t);

DistanceSample nearest_distance(const StateMultiset& from, const StateMultiset& to, int grid_size);

DistanceSample unobserved_distance(const Trajectory& real, const Trajectory& estimate,
                                   const std::vector<Observation>& obs, int t, const BehaviourModel& model);

/// Mean distance when the unobserved real agents of each species are
/// re-placed uniformly at random, averaged over `mc_samples` draws.
double random_baseline(const Trajectory& real, const std::vector<Observation>& obs, int t,
                       const BehaviourModel& model, std::size_t mc_samples, std::uint64_t seed);

double log_ratio(const Trajectory& candidate, const Trajectory& reference, const BehaviourModel& model);

struct DistanceRow {
  int t = 0;
  DistanceSample distance;
  double baseline = 0.0;
};

/// One row per t = 1..T.
std::vector<DistanceRow> distance_curve(const Trajectory& real, const Trajectory& estimate,
                                        const std::vector<Observation>& obs, const BehaviourModel& model,
                                        std::size_t mc_samples, std::uint64_t seed);

/// CSV `t,mean_distance,n_samples,baseline` followed by `# log_ratio=<x>`.
void write_metrics_csv(std::ostream& os, const std::vector<DistanceRow>& rows, double log_ratio);

}  // namespace abmap
