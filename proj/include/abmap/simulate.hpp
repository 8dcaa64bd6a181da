#pragma once

// Forward sampling of trajectories and synthetic count observations.
//
// Updates are synchronous: every agent alive at t-1 picks one event enabled
// in the state at t-1. Agents are visited in state-index order so a seed
// fixes the whole run. Observations thin each agent independently and report
// per-state lower bounds (false negatives only).

#include <variant>

#include "abmap/core_model.hpp"

namespace abmap {

/// Random initial placement for the predator-prey grid.
struct UniformPlacement {
  int grid_size = 32;
  Count predators = 40;
  Count prey = 60;
};

struct SimConfig {
  std::uint64_t seed = 1;
  int timesteps = 7;
  std::variant<StateMultiset, UniformPlacement> initial = UniformPlacement{};
  double observe_prob = 2.0 / 3.0;

  void validate() const;
};

/// Initial state for `cfg`, drawing a uniform placement from the simulation
/// stream when requested.
StateMultiset initial_state(const SimConfig& cfg);

/// Samples a trajectory. Throws std::domain_error if some agent has no
/// enabled event.
Trajectory simulate(const BehaviourModel& model, const SimConfig& cfg);

/// One lower-bound observation per occupied state with at least one detected
/// agent, for every t >= 1. The initial state is boundary data and is not
/// observed here.
std::vector<Observation> observe(const Trajectory& traj, const BehaviourModel& model,
                                 double observe_prob, std::uint64_t rng_seed);

}  // namespace abmap
