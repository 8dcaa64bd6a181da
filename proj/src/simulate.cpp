#include "abmap/simulate.hpp"

#include "abmap/predprey.hpp"
#include "abmap/random.hpp"

namespace abmap {

namespace {

// Stream 0 drives placement and dynamics; observation seeds are independent.
constexpr std::uint64_t kDynamicsStream = 0;

}  // namespace

void SimConfig::validate() const {
  if (timesteps < 1) throw std::invalid_argument("timesteps must be >= 1");
  if (!(observe_prob >= 0.0 && observe_prob <= 1.0)) {
    throw std::invalid_argument("observe_prob must lie in [0, 1]");
  }
}

static StateMultiset initial_state(const SimConfig& cfg, Rng& rng) {
  if (const auto* fixed = std::get_if<StateMultiset>(&cfg.initial)) return *fixed;
  const auto& place = std::get<UniformPlacement>(cfg.initial);
  return predprey::place_uniform(place.grid_size, place.predators, place.prey, rng);
}

StateMultiset initial_state(const SimConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, kDynamicsStream));
  return initial_state(cfg, rng);
}

Trajectory simulate(const BehaviourModel& model, const SimConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kDynamicsStream));
  Trajectory traj;
  traj.initial = initial_state(cfg, rng);
  for (const auto& [s, n] : traj.initial) {
    (void)n;
    if (s >= model.domain().size) throw std::invalid_argument("initial state outside model domain");
  }

  StateMultiset current = traj.initial;
  std::vector<EventId> enabled;
  std::vector<double> cumulative;
  for (int t = 1; t <= cfg.timesteps; ++t) {
    ModelEvent step;
    for (const auto& [state, n] : current) {
      enabled.clear();
      cumulative.clear();
      double total = 0.0;
      for (EventId id : model.events_of(state)) {
        const auto& e = model.event(id);
        if (!enabled_in(e, current)) continue;
        total += e.probability;
        enabled.push_back(id);
        cumulative.push_back(total);
      }
      if (enabled.empty()) {
        throw std::domain_error("no enabled event for state " + std::to_string(state) +
                                " at t=" + std::to_string(t - 1));
      }
      for (Count k = 0; k < n; ++k) {
        const double u = rng.uniform01() * total;
        std::size_t pick = 0;
        while (pick + 1 < enabled.size() && u >= cumulative[pick]) ++pick;
        step.add(enabled[pick]);
      }
    }
    for (const auto& inj : model.injections()) {
      if (inj.timestep != t || !enabled_in(inj.event, current)) continue;
      if (rng.bernoulli(inj.event.probability)) step.add(inj.event.id);
    }
    current = consequence(step, model);
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

std::vector<Observation> observe(const Trajectory& traj, const BehaviourModel& model,
                                 double observe_prob, std::uint64_t rng_seed) {
  if (!(observe_prob >= 0.0 && observe_prob <= 1.0)) {
    throw std::invalid_argument("observe_prob must lie in [0, 1]");
  }
  Rng rng(rng_seed);
  std::vector<Observation> out;
  for (std::size_t t = 1; t <= traj.horizon(); ++t) {
    for (const auto& [state, n] : states_at(traj, t, model)) {
      Count seen = 0;
      for (Count k = 0; k < n; ++k) {
        if (rng.uniform01() < observe_prob) ++seen;
      }
      if (seen > 0) out.push_back({static_cast<int>(t), seen, kUnbounded, {state}});
    }
  }
  return out;
}

}  // namespace abmap
