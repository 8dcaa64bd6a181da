#pragma once

// Offline MAP estimation over a window and online streaming assimilation.
//
// The online assimilator keeps a partial trajectory of committed event
// counts. Each window is solved with agency relaxed to "at most one action",
// the decoded counts are committed, and hanging agents stay where they are
// until later observations move them. When a window is infeasible the most
// recent committed timestep is discarded and the window is solved again.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmap/core_model.hpp"
#include "abmap/encode.hpp"
#include "abmap/milp.hpp"

namespace abmap {

/// No trajectory satisfies the observations (after any rollback).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver hit its node or time limit before proving optimality.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveStats {
  std::size_t solves = 0;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  std::size_t variables = 0;  // of the last program
  std::size_t constraints = 0;
};

Trajectory map_offline(const BehaviourModel& model, const StateMultiset& initial,
                       const std::vector<Observation>& obs, int horizon, Count multiplicity,
                       const MilpLimits& limits = {}, SolveStats* stats = nullptr);

struct AssimilationState {
  StateMultiset initial;
  Count multiplicity = 1;
  int window = 1;
  int lookback = 0;                    // see OnlineEncodeOptions
  std::vector<ModelEvent> committed;   // [t-1], size == horizon_processed
  int horizon_processed = 0;
  std::size_t rollback_count = 0;
  std::vector<Observation> observations;  // everything ingested so far

  friend bool operator==(const AssimilationState&, const AssimilationState&) = default;
};

struct StepReport {
  int horizon = 0;
  std::size_t rollbacks = 0;  // during this call
  SolveStats stats;
};

class OnlineAssimilator {
 public:
  OnlineAssimilator(std::shared_ptr<const BehaviourModel> model, AssimilationState state,
                    MilpLimits limits = {});

  const AssimilationState& state() const { return state_; }
  const BehaviourModel& model() const { return *model_; }

  /// Ingests the next window of `steps` timesteps (0 = the configured
  /// window). Observation timesteps must lie in
  /// (horizon_processed, horizon_processed + steps].
  StepReport step(const std::vector<Observation>& new_obs, int steps = 0);

  /// Discards every commitment at the largest committed timestep. Returns
  /// false when nothing is committed.
  bool rollback();

  /// Commits an exit event for hanging agents whose evasion probability
  /// (1 - observe_prob)^(horizon - t) is below `threshold`. Returns one
  /// diagnostic per hanging state that has no exit event.
  std::vector<std::string> commit_departure(double threshold, double observe_prob);

  /// Extends the partial trajectory to a complete one over the processed
  /// horizon, rolling back if needed.
  Trajectory complete(StepReport* report = nullptr);

  /// Committed events as a (partial) trajectory.
  Trajectory partial() const;

 private:
  MilpResult solve(const EncodedProblem& problem, SolveStats& stats) const;

  std::shared_ptr<const BehaviourModel> model_;
  AssimilationState state_;
  MilpLimits limits_;
};

}  // namespace abmap
