#pragma once

// Event calculus for discrete-time, discrete-state agent-based models.
//
// An agent in state `actor` expresses one behaviour per timestep. A behaviour
// (AgentEvent) may only fire when every state in `required` is occupied and
// every state in `forbidden` is empty at the start of the step; it replaces
// the actor by the multiset `consequence`. A model event is the multiset of
// agent events that fire in one timestep, and a trajectory is an initial state
// followed by one model event per step.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abmap {

using StateIndex = std::uint32_t;
using EventId = std::uint32_t;
using Count = std::int64_t;

/// Actor marker for injection events. Zero-energy injectors are never
/// represented as agents, so injections consume no actor.
inline constexpr StateIndex kZeroEnergyActor = std::numeric_limits<StateIndex>::max();

/// Sparse multiset of keys with positive multiplicity. Zero entries are
/// erased so that equality is structural.
template <class Key>
class CountMap {
 public:
  using Storage = std::map<Key, Count>;
  using const_iterator = typename Storage::const_iterator;

  CountMap() = default;
  CountMap(std::initializer_list<std::pair<const Key, Count>> init) {
    for (const auto& [key, n] : init) add(key, n);
  }

  /// Adds `n` copies of `key`. Negative `n` removes copies; the count may not
  /// drop below zero.
  void add(Key key, Count n = 1);

  Count count(Key key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }
  bool contains(Key key) const { return counts_.count(key) != 0; }
  bool empty() const { return counts_.empty(); }
  std::size_t distinct() const { return counts_.size(); }
  Count total() const {
    Count sum = 0;
    for (const auto& kv : counts_) sum += kv.second;
    return sum;
  }

  const_iterator begin() const { return counts_.begin(); }
  const_iterator end() const { return counts_.end(); }

  CountMap& operator+=(const CountMap& other) {
    for (const auto& [key, n] : other) add(key, n);
    return *this;
  }
  friend CountMap operator+(CountMap a, const CountMap& b) { return a += b; }
  friend bool operator==(const CountMap&, const CountMap&) = default;

 private:
  Storage counts_;
};

template <class Key>
void CountMap<Key>::add(Key key, Count n) {
  if (n == 0) return;
  Count& slot = counts_[key];
  slot += n;
  if (slot < 0) {
    counts_.erase(key);
    throw std::domain_error("CountMap: negative multiplicity");
  }
  if (slot == 0) counts_.erase(key);
}

using StateMultiset = CountMap<StateIndex>;
/// Occurrence counts of agent events within one timestep.
using ModelEvent = CountMap<EventId>;

struct StateDomain {
  std::size_t size = 1;
  std::vector<std::string> labels;  // empty, or exactly `size` distinct names

  void validate() const;
};

/// One behaviour option: in state `actor`, with every `required` state
/// present and every `forbidden` state absent, the agent is replaced by
/// `consequence` with the given probability.
struct AgentEvent {
  EventId id = 0;
  StateIndex actor = 0;
  std::vector<StateIndex> required;   // sorted, unique
  std::vector<StateIndex> forbidden;  // sorted, unique
  StateMultiset consequence;
  double probability = 1.0;
  std::string label;
};

/// A boundary-condition event fired by the zero-energy injector at
/// `timestep`. Its consequence enters the system in that step. Probability 1
/// injections are mandatory; others occur at most once.
struct Injection {
  int timestep = 1;
  AgentEvent event;
};

class BehaviourModel {
 public:
  /// Validates the model: state indices in range, unique ids, positive
  /// probabilities, disjoint required/forbidden sets, and per-environment
  /// normalization of every actor state's events (within 1e-9).
  BehaviourModel(StateDomain domain, std::vector<AgentEvent> events,
                 std::vector<Injection> injections = {});

  const StateDomain& domain() const { return domain_; }
  const std::vector<AgentEvent>& events() const { return events_; }
  const std::vector<Injection>& injections() const { return injections_; }

  /// Lookup by id; throws std::domain_error for unknown ids.
  const AgentEvent& event(EventId id) const;
  bool has_event(EventId id) const;
  bool is_injection(EventId id) const;
  /// Injection entry carrying `id`; only valid when is_injection(id).
  const Injection& injection(EventId id) const;

  /// Ordinary (non-injection) events whose actor is `state`.
  const std::vector<EventId>& events_of(StateIndex state) const;

 private:
  void check_normalization() const;

  StateDomain domain_;
  std::vector<AgentEvent> events_;
  std::vector<Injection> injections_;
  std::vector<std::int64_t> slot_of_id_;  // >=0 event index, <=-1 injection -(k+1)
  std::vector<std::vector<EventId>> by_actor_;
};

/// Largest |sum - 1| of event probabilities over every actor state and every
/// truth assignment of that state's condition states.
double max_normalization_error(const BehaviourModel& model);

struct Trajectory {
  StateMultiset initial;
  std::vector<ModelEvent> steps;  // steps[i] happens between t=i and t=i+1

  std::size_t horizon() const { return steps.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline constexpr Count kUnbounded = std::numeric_limits<Count>::max();

/// Count observation: between `lower` and `upper` agents (inclusive) occupy
/// a state in `predicate` at `timestep`.
struct Observation {
  int timestep = 1;
  Count lower = 0;
  Count upper = kUnbounded;
  std::vector<StateIndex> predicate;  // sorted, unique

  bool unbounded() const { return upper == kUnbounded; }
  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class Feasibility { kComplete, kPartial };

enum class ViolationKind { kAgency, kPresence, kAbsence, kInjection, kObservation };

struct Violation {
  int timestep = 0;
  ViolationKind kind = ViolationKind::kAgency;
  std::optional<StateIndex> state;
  std::string detail;
};

std::string to_string(ViolationKind kind);
std::string describe(const Violation& v);

/// Sum of the consequences of every member of `step`.
StateMultiset consequence(const ModelEvent& step, const BehaviourModel& model);

/// Multiset of actor states consumed by `step` (injections excluded).
StateMultiset actors(const ModelEvent& step, const BehaviourModel& model);

/// Model state at time t: the initial multiset for t = 0, otherwise the
/// consequence of step t. Throws std::out_of_range outside 0..horizon.
StateMultiset states_at(const Trajectory& traj, std::size_t t, const BehaviourModel& model);

std::vector<Violation> check_feasible(const Trajectory& traj, const BehaviourModel& model,
                                      Feasibility mode);

/// ln of the product of the probabilities of every event occurrence.
double log_probability(const Trajectory& traj, const BehaviourModel& model);

/// Number of agents in `states` whose state lies in the sorted `predicate`.
Count count_matching(const StateMultiset& states, const std::vector<StateIndex>& predicate);

/// Observation timesteps must lie in 0..horizon (std::out_of_range otherwise).
std::vector<Violation> satisfies(const Trajectory& traj, const std::vector<Observation>& obs,
                                 const BehaviourModel& model);

/// Whether every required state is present in and no forbidden state is in
/// `environment`.
bool enabled_in(const AgentEvent& event, const StateMultiset& environment);

}  // namespace abmap
