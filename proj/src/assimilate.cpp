#include "abmap/assimilate.hpp"

#include <algorithm>
#include <cmath>

namespace abmap {

namespace {

void record(SolveStats& stats, const EncodedProblem& problem, const MilpResult& result) {
  ++stats.solves;
  stats.nodes += result.nodes_explored;
  stats.lp_iterations += result.lp_iterations;
  stats.variables = problem.program.variables.size();
  stats.constraints = problem.program.constraints.size();
}

[[noreturn]] void budget_exceeded(const MilpResult& r) {
  throw BudgetError("solver budget exceeded after " + std::to_string(r.nodes_explored) + " nodes");
}

int last_committed(const std::vector<ModelEvent>& committed) {
  for (int t = static_cast<int>(committed.size()); t >= 1; --t) {
    if (!committed[static_cast<std::size_t>(t) - 1].empty()) return t;
  }
  return 0;
}

}  // namespace

Trajectory map_offline(const BehaviourModel& model, const StateMultiset& initial,
                       const std::vector<Observation>& obs, int horizon, Count multiplicity,
                       const MilpLimits& limits, SolveStats* stats) {
  EncodedProblem problem = encode_offline(model, initial, obs, horizon, multiplicity);
  MilpResult result = solve_milp(problem.program, limits);
  SolveStats local;
  record(stats ? *stats : local, problem, result);
  switch (result.status) {
    case MilpStatus::kOptimal:
      return decode(result.incumbent, problem.map);
    case MilpStatus::kInfeasible:
      throw InfeasibleError("no trajectory over horizon " + std::to_string(horizon) +
                            " satisfies the observations");
    case MilpStatus::kTimeout:
      break;
  }
  budget_exceeded(result);
}

OnlineAssimilator::OnlineAssimilator(std::shared_ptr<const BehaviourModel> model, AssimilationState state,
                                     MilpLimits limits)
    : model_(std::move(model)), state_(std::move(state)), limits_(limits) {
  if (!model_) throw std::invalid_argument("null model");
  if (state_.window < 1) throw std::invalid_argument("window must be at least 1");
  if (state_.lookback < 0) throw std::invalid_argument("lookback must be non-negative");
  if (state_.horizon_processed < 0 ||
      state_.committed.size() > static_cast<std::size_t>(state_.horizon_processed)) {
    throw std::invalid_argument("committed steps beyond processed horizon");
  }
  state_.committed.resize(static_cast<std::size_t>(state_.horizon_processed));
  auto v = check_feasible(partial(), *model_, Feasibility::kPartial);
  if (!v.empty()) throw std::invalid_argument("committed events not partially feasible: " + describe(v.front()));
}

Trajectory OnlineAssimilator::partial() const { return Trajectory{state_.initial, state_.committed}; }

MilpResult OnlineAssimilator::solve(const EncodedProblem& problem, SolveStats& stats) const {
  MilpResult result = solve_milp(problem.program, limits_);
  record(stats, problem, result);
  if (result.status == MilpStatus::kTimeout) budget_exceeded(result);
  return result;
}

bool OnlineAssimilator::rollback() {
  const int t = last_committed(state_.committed);
  if (t == 0) return false;
  state_.committed[static_cast<std::size_t>(t) - 1] = ModelEvent{};
  ++state_.rollback_count;
  return true;
}

StepReport OnlineAssimilator::step(const std::vector<Observation>& new_obs, int steps) {
  if (steps < 0) throw std::invalid_argument("negative window");
  const int horizon = state_.horizon_processed + (steps == 0 ? state_.window : steps);
  for (const auto& o : new_obs) {
    if (o.timestep <= state_.horizon_processed || o.timestep > horizon) {
      throw std::invalid_argument("observation at t=" + std::to_string(o.timestep) + " outside window (" +
                                  std::to_string(state_.horizon_processed) + ", " + std::to_string(horizon) +
                                  "]");
    }
  }
  std::vector<Observation> all = state_.observations;
  all.insert(all.end(), new_obs.begin(), new_obs.end());

  StepReport report;
  report.horizon = horizon;
  OnlineEncodeOptions options;
  options.lookback = state_.lookback;
  for (;;) {
    EncodedProblem problem =
        encode_online(*model_, state_.initial, all, horizon, state_.multiplicity, state_.committed, options);
    MilpResult result = solve(problem, report.stats);
    if (result.status == MilpStatus::kOptimal) {
      state_.committed = decode(result.incumbent, problem.map).steps;
      break;
    }
    if (!rollback()) {
      throw InfeasibleError("observations up to t=" + std::to_string(horizon) +
                            " are inconsistent with the model and boundary after full rollback");
    }
    ++report.rollbacks;
  }
  state_.horizon_processed = horizon;
  state_.observations = std::move(all);
  return report;
}

std::vector<std::string> OnlineAssimilator::commit_departure(double threshold, double observe_prob) {
  if (!(observe_prob > 0.0 && observe_prob <= 1.0)) throw std::invalid_argument("observe_prob must be in (0,1]");
  std::vector<std::string> diagnostics;
  const int horizon = state_.horizon_processed;
  StateMultiset here = state_.initial;
  for (int t = 0; t < horizon; ++t) {
    ModelEvent& next = state_.committed[static_cast<std::size_t>(t)];
    const double evasion = std::pow(1.0 - observe_prob, horizon - t);
    if (evasion < threshold) {
      const StateMultiset acting = actors(next, *model_);
      for (const auto& [s, n] : here) {
        const Count surplus = n - acting.count(s);
        if (surplus <= 0) continue;
        const AgentEvent* exit = nullptr;
        for (EventId id : model_->events_of(s)) {
          const AgentEvent& e = model_->event(id);
          if (!e.consequence.empty() || !enabled_in(e, here)) continue;
          if (!exit || e.probability > exit->probability) exit = &e;
        }
        if (!exit) {
          diagnostics.push_back("t=" + std::to_string(t) + " state " + std::to_string(s) +
                                ": no exit event, departure skipped");
          continue;
        }
        next.add(exit->id, surplus);
      }
    }
    here = consequence(next, *model_);
  }
  return diagnostics;
}

Trajectory OnlineAssimilator::complete(StepReport* report) {
  StepReport local;
  StepReport& rep = report ? *report : local;
  rep.horizon = state_.horizon_processed;
  OnlineEncodeOptions options;
  options.complete = true;
  for (;;) {
    EncodedProblem problem = encode_online(*model_, state_.initial, state_.observations, state_.horizon_processed,
                                           state_.multiplicity, state_.committed, options);
    MilpResult result = solve(problem, rep.stats);
    if (result.status == MilpStatus::kOptimal) return decode(result.incumbent, problem.map);
    if (!rollback()) {
      throw InfeasibleError("no complete trajectory satisfies the observations after full rollback");
    }
    ++rep.rollbacks;
  }
}

}  // namespace abmap
