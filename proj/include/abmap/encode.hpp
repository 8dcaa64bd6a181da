#pragma once

// Compilation of MAP-trajectory queries into integer programs.
//
// Variables:
//   c_t{t}_e{id}  number of times event `id` fires in step t (objective ln p)
//   b_t{t}_s{s}   1 iff state s is occupied at time t
//
// The occupancy of state s at time t is a linear expression
//   Psi_ts = sum_e Phi_es c_te + (committed and mandatory-injection constants)
// and is never a variable. Rows, per step t and state s:
//   agency      Psi_(t-1)s - sum_{actor(e)=s} c_te  = committed actors   (offline, completion)
//                                                  >= committed actors   (online)
//   presence    M b_(t-1)s - sum_e R_es c_te        >= constants
//   absence     sum_e Rbar_es c_te + M b_(t-1)s     <= M - constants
//   link        M b_ts - Psi_ts >= 0,   Psi_ts - b_ts >= 0
//   observation L <= sum_{s in B} Psi_ts <= U
//
// Only events reachable from the initial state get variables, and b
// variables exist only where a presence or absence row needs them.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "abmap/core_model.hpp"
#include "abmap/integer_program.hpp"

namespace abmap {

struct Support {
  std::vector<std::vector<StateIndex>> states;  // [0..T], sorted
  std::vector<std::vector<EventId>> events;     // [0..T], events[0] empty, sorted
};

/// Forward closure of states and events reachable from `initial` within T
/// steps. An event is live at step t when its actor and all of its required
/// states are reachable at t-1 (injections: when t is their timestep and the
/// required states are reachable).
Support reachable_support(const BehaviourModel& model, const StateMultiset& initial, int horizon);

struct EncodingMap {
  std::map<std::pair<int, EventId>, int> var_of_count;
  std::map<std::pair<int, StateIndex>, int> var_of_bool;
  Count multiplicity = 1;
  int horizon = 0;
  StateMultiset initial;
  std::vector<ModelEvent> committed;  // [t-1] -> committed counts c^_te
  std::vector<ModelEvent> mandatory;  // [t-1] -> probability-1 injections
};

/// Default multiplicity: total initial occupancy plus every agent any
/// injection can add over the horizon, and at least 1.
Count default_multiplicity(const BehaviourModel& model, const StateMultiset& initial, int horizon);

/// Thrown when encoding inputs are inconsistent (bad multiplicity,
/// observation outside the horizon, infeasible commitments).
class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EncodedProblem {
  IntegerProgram program;
  EncodingMap map;
};

EncodedProblem encode_offline(const BehaviourModel& model, const StateMultiset& initial,
                              const std::vector<Observation>& obs, int horizon, Count multiplicity);

struct OnlineEncodeOptions {
  /// Steps t > horizon - lookback get variables; 0 means every step. Steps
  /// whose previous time has agents without a committed action always get
  /// variables, and so does every step after a step with variables.
  int lookback = 0;
  /// Agency as equality (completion of a partial trajectory) instead of
  /// at-most-one. Completion also keeps every observation row.
  bool complete = false;
};

/// `committed[t-1]` holds committed counts for step t (size may be below
/// `horizon`; missing steps are empty). Commitments must be PARTIAL-feasible
/// from `initial`.
EncodedProblem encode_online(const BehaviourModel& model, const StateMultiset& initial,
                             const std::vector<Observation>& obs, int horizon, Count multiplicity,
                             const std::vector<ModelEvent>& committed,
                             const OnlineEncodeOptions& options = {});

/// Rounds the count variables and adds committed and mandatory events.
/// Throws std::runtime_error if a count is further than 1e-6 from an integer.
Trajectory decode(const std::vector<double>& solution, const EncodingMap& map);

/// Assignment of every program variable induced by `traj` (c from the step
/// counts minus commitments, b from occupancy). Used to check soundness.
/// Returns std::nullopt if `traj` uses an event without a variable.
std::optional<std::vector<double>> substitute(const Trajectory& traj, const BehaviourModel& model,
                                              const EncodedProblem& problem);

}  // namespace abmap
