#include "abmap/core_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>
#include <sstream>

namespace abmap {

namespace {

constexpr double kNormalizationTolerance = 1e-9;
constexpr std::size_t kMaxConditionStates = 20;

bool sorted_unique(const std::vector<StateIndex>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

void check_event_shape(const AgentEvent& e, std::size_t domain_size, bool injection) {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "event " << e.id << ": " << what;
    throw std::invalid_argument(os.str());
  };
  if (!(e.probability > 0.0) || e.probability > 1.0) fail("probability must lie in (0, 1]");
  if (!injection && e.actor >= domain_size) fail("actor state out of range");
  if (!sorted_unique(e.required) || !sorted_unique(e.forbidden)) {
    fail("required/forbidden sets must be sorted and duplicate-free");
  }
  for (StateIndex s : e.required) {
    if (s >= domain_size) fail("required state out of range");
  }
  for (StateIndex s : e.forbidden) {
    if (s >= domain_size) fail("forbidden state out of range");
    if (std::binary_search(e.required.begin(), e.required.end(), s)) {
      fail("state is both required and forbidden");
    }
  }
  for (const auto& [s, n] : e.consequence) {
    (void)n;
    if (s >= domain_size) fail("consequence state out of range");
  }
}

// Calls visit(actor, worst |sum-1|) for each actor state.
template <class Visit>
void for_each_actor_normalization(const BehaviourModel& model, Visit visit) {
  for (StateIndex actor = 0; actor < model.domain().size; ++actor) {
    const auto& ids = model.events_of(actor);
    if (ids.empty()) continue;
    std::set<StateIndex> cond;
    for (EventId id : ids) {
      const auto& e = model.event(id);
      cond.insert(e.required.begin(), e.required.end());
      cond.insert(e.forbidden.begin(), e.forbidden.end());
    }
    if (cond.size() > kMaxConditionStates) {
      throw std::invalid_argument("normalization check: too many condition states for actor " +
                                  std::to_string(actor));
    }
    const std::vector<StateIndex> states(cond.begin(), cond.end());
    double worst = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << states.size()); ++mask) {
      auto present = [&](StateIndex s) {
        auto pos = std::lower_bound(states.begin(), states.end(), s) - states.begin();
        return ((mask >> pos) & 1U) != 0;
      };
      double sum = 0.0;
      for (EventId id : ids) {
        const auto& e = model.event(id);
        bool ok = std::all_of(e.required.begin(), e.required.end(), present) &&
                  std::none_of(e.forbidden.begin(), e.forbidden.end(), present);
        if (ok) sum += e.probability;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    visit(actor, worst);
  }
}

}  // namespace

void StateDomain::validate() const {
  if (size == 0) throw std::invalid_argument("state domain must be non-empty");
  if (!labels.empty()) {
    if (labels.size() != size) throw std::invalid_argument("state labels must match domain size");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw std::invalid_argument("state labels must be distinct");
  }
}

BehaviourModel::BehaviourModel(StateDomain domain, std::vector<AgentEvent> events,
                               std::vector<Injection> injections)
    : domain_(std::move(domain)),
      events_(std::move(events)),
      injections_(std::move(injections)),
      by_actor_(domain_.size) {
  domain_.validate();
  EventId max_id = 0;
  for (const auto& e : events_) max_id = std::max(max_id, e.id);
  for (const auto& inj : injections_) max_id = std::max(max_id, inj.event.id);
  if (!events_.empty() || !injections_.empty()) slot_of_id_.assign(std::size_t{max_id} + 1, 0);

  std::vector<bool> used(slot_of_id_.size(), false);
  auto claim = [&](EventId id) {
    if (used[id]) throw std::invalid_argument("duplicate event id " + std::to_string(id));
    used[id] = true;
  };
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& e = events_[k];
    check_event_shape(e, domain_.size, false);
    claim(e.id);
    slot_of_id_[e.id] = static_cast<std::int64_t>(k);
    by_actor_[e.actor].push_back(e.id);
  }
  for (std::size_t k = 0; k < injections_.size(); ++k) {
    auto& inj = injections_[k];
    inj.event.actor = kZeroEnergyActor;
    if (inj.timestep < 1) throw std::invalid_argument("injection timestep must be >= 1");
    check_event_shape(inj.event, domain_.size, true);
    claim(inj.event.id);
    slot_of_id_[inj.event.id] = -static_cast<std::int64_t>(k) - 1;
  }
  for (std::size_t id = 0; id < used.size(); ++id) {
    if (!used[id]) slot_of_id_[id] = std::numeric_limits<std::int64_t>::min();
  }
  check_normalization();
}

bool BehaviourModel::has_event(EventId id) const {
  return id < slot_of_id_.size() && slot_of_id_[id] != std::numeric_limits<std::int64_t>::min();
}

bool BehaviourModel::is_injection(EventId id) const {
  return has_event(id) && slot_of_id_[id] < 0;
}

const AgentEvent& BehaviourModel::event(EventId id) const {
  if (!has_event(id)) throw std::domain_error("unknown event id " + std::to_string(id));
  auto slot = slot_of_id_[id];
  if (slot >= 0) return events_[static_cast<std::size_t>(slot)];
  return injections_[static_cast<std::size_t>(-slot - 1)].event;
}

const Injection& BehaviourModel::injection(EventId id) const {
  if (!is_injection(id)) throw std::domain_error("event " + std::to_string(id) + " is not an injection");
  return injections_[static_cast<std::size_t>(-slot_of_id_[id] - 1)];
}

const std::vector<EventId>& BehaviourModel::events_of(StateIndex state) const {
  return by_actor_.at(state);
}

void BehaviourModel::check_normalization() const {
  for_each_actor_normalization(*this, [](StateIndex actor, double worst) {
    if (worst > kNormalizationTolerance) {
      std::ostringstream os;
      os << "events of state " << actor << " are not normalized (|sum - 1| = " << worst << ")";
      throw std::invalid_argument(os.str());
    }
  });
}

double max_normalization_error(const BehaviourModel& model) {
  double worst = 0.0;
  for_each_actor_normalization(model, [&](StateIndex, double w) { worst = std::max(worst, w); });
  return worst;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kAgency: return "agency";
    case ViolationKind::kPresence: return "presence";
    case ViolationKind::kAbsence: return "absence";
    case ViolationKind::kInjection: return "injection";
    case ViolationKind::kObservation: return "observation";
  }
  return "unknown";
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  os << to_string(v.kind) << " violation at t=" << v.timestep;
  if (v.state) os << " state " << *v.state;
  if (!v.detail.empty()) os << ": " << v.detail;
  return os.str();
}

StateMultiset consequence(const ModelEvent& step, const BehaviourModel& model) {
  StateMultiset out;
  for (const auto& [id, n] : step) {
    for (const auto& [s, k] : model.event(id).consequence) out.add(s, k * n);
  }
  return out;
}

StateMultiset actors(const ModelEvent& step, const BehaviourModel& model) {
  StateMultiset out;
  for (const auto& [id, n] : step) {
    if (model.is_injection(id)) continue;
    out.add(model.event(id).actor, n);
  }
  return out;
}

StateMultiset states_at(const Trajectory& traj, std::size_t t, const BehaviourModel& model) {
  if (t > traj.horizon()) throw std::out_of_range("timestep beyond trajectory horizon");
  if (t == 0) return traj.initial;
  return consequence(traj.steps[t - 1], model);
}

bool enabled_in(const AgentEvent& event, const StateMultiset& environment) {
  for (StateIndex s : event.required) {
    if (!environment.contains(s)) return false;
  }
  for (StateIndex s : event.forbidden) {
    if (environment.contains(s)) return false;
  }
  return true;
}

std::vector<Violation> check_feasible(const Trajectory& traj, const BehaviourModel& model,
                                      Feasibility mode) {
  std::vector<Violation> out;
  StateMultiset prev = traj.initial;
  for (std::size_t i = 0; i < traj.horizon(); ++i) {
    const int t = static_cast<int>(i) + 1;
    const ModelEvent& step = traj.steps[i];

    const StateMultiset acting = actors(step, model);
    std::set<StateIndex> touched;
    for (const auto& kv : acting) touched.insert(kv.first);
    if (mode == Feasibility::kComplete) {
      for (const auto& kv : prev) touched.insert(kv.first);
    }
    for (StateIndex s : touched) {
      Count have = prev.count(s), act = acting.count(s);
      bool bad = mode == Feasibility::kComplete ? act != have : act > have;
      if (bad) {
        out.push_back({t, ViolationKind::kAgency, s,
                       std::to_string(act) + " actions for " + std::to_string(have) + " agents"});
      }
    }

    std::set<StateIndex> missing, blocked;
    for (const auto& [id, n] : step) {
      const auto& e = model.event(id);
      for (StateIndex r : e.required) {
        if (!prev.contains(r)) missing.insert(r);
      }
      for (StateIndex f : e.forbidden) {
        if (prev.contains(f)) blocked.insert(f);
      }
      if (model.is_injection(id)) {
        const auto& inj = model.injection(id);
        if (inj.timestep != t) {
          out.push_back({t, ViolationKind::kInjection, std::nullopt,
                         "injection " + std::to_string(id) + " scheduled for t=" +
                             std::to_string(inj.timestep)});
        } else if (n > 1) {
          out.push_back({t, ViolationKind::kInjection, std::nullopt,
                         "injection " + std::to_string(id) + " fired more than once"});
        }
      }
    }
    for (StateIndex s : missing) out.push_back({t, ViolationKind::kPresence, s, "required state empty"});
    for (StateIndex s : blocked) out.push_back({t, ViolationKind::kAbsence, s, "forbidden state occupied"});

    if (mode == Feasibility::kComplete) {
      for (const auto& inj : model.injections()) {
        if (inj.timestep == t && inj.event.probability >= 1.0 && !step.contains(inj.event.id)) {
          out.push_back({t, ViolationKind::kInjection, std::nullopt,
                         "mandatory injection " + std::to_string(inj.event.id) + " missing"});
        }
      }
    }
    prev = consequence(step, model);
  }
  return out;
}

double log_probability(const Trajectory& traj, const BehaviourModel& model) {
  assert(check_feasible(traj, model, Feasibility::kPartial).empty());
  double lp = 0.0;
  for (const auto& step : traj.steps) {
    for (const auto& [id, n] : step) lp += static_cast<double>(n) * std::log(model.event(id).probability);
  }
  return lp;
}

Count count_matching(const StateMultiset& states, const std::vector<StateIndex>& predicate) {
  Count n = 0;
  if (predicate.size() < states.distinct()) {
    for (StateIndex s : predicate) n += states.count(s);
  } else {
    for (const auto& [s, k] : states) {
      if (std::binary_search(predicate.begin(), predicate.end(), s)) n += k;
    }
  }
  return n;
}

std::vector<Violation> satisfies(const Trajectory& traj, const std::vector<Observation>& obs,
                                 const BehaviourModel& model) {
  std::vector<Violation> out;
  std::map<int, StateMultiset> cache;
  for (const auto& o : obs) {
    if (o.timestep < 0 || static_cast<std::size_t>(o.timestep) > traj.horizon()) {
      throw std::out_of_range("observation timestep " + std::to_string(o.timestep) +
                              " outside trajectory");
    }
    auto it = cache.find(o.timestep);
    if (it == cache.end()) {
      it = cache.emplace(o.timestep, states_at(traj, static_cast<std::size_t>(o.timestep), model)).first;
    }
    Count n = count_matching(it->second, o.predicate);
    if (n < o.lower || n > o.upper) {
      std::ostringstream os;
      os << "count " << n << " outside [" << o.lower << ", ";
      if (o.unbounded()) os << "inf"; else os << o.upper;
      os << "]";
      out.push_back({o.timestep, ViolationKind::kObservation,
                     o.predicate.size() == 1 ? std::optional<StateIndex>(o.predicate[0]) : std::nullopt,
                     os.str()});
    }
  }
  return out;
}

}  // namespace abmap
