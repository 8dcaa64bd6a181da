#include "abmap/encode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace abmap {

namespace {

constexpr double kDecodeTol = 1e-6;

// Linear expression over program variables plus a constant.
struct Expr {
  std::map<int, double> terms;
  double constant = 0.0;

  void add(int var, double coef) {
    double& slot = terms[var];
    slot += coef;
    if (slot == 0.0) terms.erase(var);
  }
  bool has_terms() const { return !terms.empty(); }
};

std::vector<Term> to_terms(const std::map<int, double>& m) {
  std::vector<Term> out;
  out.reserve(m.size());
  for (const auto& [var, coef] : m) out.push_back({var, coef});
  return out;
}

class Builder {
 public:
  Builder(const BehaviourModel& model, const StateMultiset& initial, const std::vector<Observation>& obs,
          int horizon, Count multiplicity, std::vector<ModelEvent> committed, bool online, bool complete,
          int lookback)
      : model_(model),
        initial_(initial),
        obs_(obs),
        horizon_(horizon),
        m_(multiplicity),
        online_(online),
        complete_(complete),
        lookback_(lookback) {
    result_.map.multiplicity = multiplicity;
    result_.map.horizon = horizon;
    result_.map.initial = initial;
    committed.resize(static_cast<std::size_t>(horizon));
    result_.map.committed = std::move(committed);
    result_.map.mandatory.assign(static_cast<std::size_t>(horizon), ModelEvent{});
  }

  EncodedProblem run() {
    validate_inputs();
    collect_mandatory();
    support_ = online_ ? committed_support() : reachable_support(model_, initial_, horizon_);
    choose_variable_steps();
    create_count_variables();
    build_occupancy();
    observation_rows();
    agency_rows();
    condition_rows();
    for (auto& row : pending_rows_) push_row(std::move(row.name), row.expr, row.lower, row.upper);
    return std::move(result_);
  }

 private:
  struct PendingRow {
    std::string name;
    Expr expr;
    double lower, upper;
  };

  const std::vector<ModelEvent>& committed() const { return result_.map.committed; }
  IntegerProgram& program() { return result_.program; }

  void validate_inputs() {
    if (horizon_ < 0) throw EncodingError("horizon must be non-negative");
    if (m_ < 1) throw EncodingError("multiplicity must be at least 1");
    for (const auto& [s, n] : initial_) {
      if (s >= model_.domain().size) throw EncodingError("initial state outside model domain");
      if (n > m_) {
        throw EncodingError("multiplicity " + std::to_string(m_) + " below initial occupancy " +
                            std::to_string(n) + " of state " + std::to_string(s));
      }
    }
    for (const auto& o : obs_) {
      if (o.timestep < 0 || o.timestep > horizon_) {
        throw EncodingError("observation at t=" + std::to_string(o.timestep) + " outside horizon 0.." +
                            std::to_string(horizon_));
      }
    }
    if (online_) {
      Trajectory partial{initial_, committed()};
      auto v = check_feasible(partial, model_, Feasibility::kPartial);
      if (!v.empty()) throw EncodingError("committed events are not partially feasible: " + describe(v.front()));
    }
  }

  void choose_variable_steps() {
    variable_step_.assign(static_cast<std::size_t>(horizon_) + 1, true);
    variable_step_[0] = false;
    if (!online_ || complete_ || lookback_ <= 0) return;
    StateMultiset prev = initial_;
    for (int t = 1; t <= horizon_; ++t) {
      const ModelEvent& step = committed()[static_cast<std::size_t>(t) - 1];
      const StateMultiset acting = actors(step, model_);
      bool hanging = false;
      for (const auto& [s, n] : prev) {
        if (acting.count(s) < n) hanging = true;
      }
      // Agents moved by a free step must be free to act in every later one.
      const bool earlier = variable_step_[static_cast<std::size_t>(t) - 1];
      variable_step_[static_cast<std::size_t>(t)] = earlier || t > horizon_ - lookback_ || hanging;
      prev = consequence(step, model_);
    }
  }

  void collect_mandatory() {
    for (const auto& inj : model_.injections()) {
      if (inj.timestep > horizon_ || inj.event.probability < 1.0) continue;
      const auto tu = static_cast<std::size_t>(inj.timestep);
      if (!committed()[tu - 1].contains(inj.event.id)) result_.map.mandatory[tu - 1].add(inj.event.id);
    }
  }

  // Reachability restricted to agents that can still act: those left without
  // a committed action, and anything new events could create.
  Support committed_support() const {
    Support out;
    const auto size = model_.domain().size;
    out.states.resize(static_cast<std::size_t>(horizon_) + 1);
    out.events.resize(static_cast<std::size_t>(horizon_) + 1);
    std::vector<char> present(size, 0), free(size, 0);
    auto mark_fixed = [&](const StateMultiset& occ, int t) {
      const StateMultiset acting = t < horizon_ ? actors(committed()[static_cast<std::size_t>(t)], model_)
                                                : StateMultiset{};
      for (const auto& [s, n] : occ) {
        present[s] = 1;
        if (n > acting.count(s)) free[s] = 1;
      }
    };
    mark_fixed(initial_, 0);
    for (StateIndex s = 0; s < size; ++s) {
      if (present[s]) out.states[0].push_back(s);
    }
    for (int t = 1; t <= horizon_; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      auto& live = out.events[tu];
      for (StateIndex s = 0; s < size; ++s) {
        if (!free[s]) continue;
        for (EventId id : model_.events_of(s)) {
          const AgentEvent& e = model_.event(id);
          if (std::all_of(e.required.begin(), e.required.end(), [&](StateIndex r) { return present[r] != 0; })) {
            live.push_back(id);
          }
        }
      }
      for (const auto& inj : model_.injections()) {
        if (inj.timestep == t) live.push_back(inj.event.id);
      }
      std::sort(live.begin(), live.end());
      std::fill(present.begin(), present.end(), 0);
      std::fill(free.begin(), free.end(), 0);
      mark_fixed(consequence(committed()[tu - 1], model_) + consequence(result_.map.mandatory[tu - 1], model_), t);
      for (EventId id : live) {
        for (const auto& [s, n] : model_.event(id).consequence) {
          (void)n;
          present[s] = 1;
          free[s] = 1;
        }
      }
      for (StateIndex s = 0; s < size; ++s) {
        if (present[s]) out.states[tu].push_back(s);
      }
    }
    return out;
  }

  void create_count_variables() {
    for (int t = 1; t <= horizon_; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      const ModelEvent& fixed = committed()[tu - 1];
      if (!variable_step_[tu]) continue;
      for (EventId id : support_.events[tu]) {
        const AgentEvent& e = model_.event(id);
        Variable v;
        v.objective = std::log(e.probability);
        if (model_.is_injection(id)) {
          if (e.probability >= 1.0 || fixed.contains(id)) continue;
          v.kind = VarKind::kBinary;
          v.upper = 1.0;
        } else {
          v.kind = VarKind::kInteger;
          v.upper = static_cast<double>(m_);
        }
        v.name = "c_t" + std::to_string(t) + "_e" + std::to_string(id);
        int j = program().add_variable(std::move(v));
        result_.map.var_of_count.emplace(std::make_pair(t, id), j);
        vars_at_[t].push_back({id, j});
      }
    }
  }

  void build_occupancy() {
    psi_.assign(static_cast<std::size_t>(horizon_) + 1, {});
    for (const auto& [s, n] : initial_) psi_[0][s].constant += static_cast<double>(n);
    for (int t = 1; t <= horizon_; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      auto& level = psi_[tu];
      for (const ModelEvent* fixed : std::array<const ModelEvent*, 2>{&committed()[tu - 1], &result_.map.mandatory[tu - 1]}) {
        for (const auto& [s, n] : consequence(*fixed, model_)) level[s].constant += static_cast<double>(n);
      }
      for (const auto& [id, j] : vars_at_[t]) {
        for (const auto& [s, n] : model_.event(id).consequence) level[s].add(j, static_cast<double>(n));
      }
    }
  }

  void observation_rows() {
    for (std::size_t k = 0; k < obs_.size(); ++k) {
      const Observation& o = obs_[k];
      const auto tu = static_cast<std::size_t>(o.timestep);
      if (online_ && !complete_ && o.timestep >= 1 && !committed()[tu - 1].empty()) continue;
      Expr row;
      for (StateIndex s : o.predicate) {
        auto it = psi_[tu].find(s);
        if (it == psi_[tu].end()) continue;
        for (const auto& [j, c] : it->second.terms) row.add(j, c);
        row.constant += it->second.constant;
      }
      const double upper = o.unbounded() ? kInf : static_cast<double>(o.upper) - row.constant;
      push_row("obs" + std::to_string(k) + "_t" + std::to_string(o.timestep), row,
               static_cast<double>(o.lower) - row.constant, upper);
    }
  }

  void agency_rows() {
    const bool equality = !online_ || complete_;
    for (int t = 1; t <= horizon_; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      const StateMultiset fixed_actors = actors(committed()[tu - 1], model_);
      std::map<StateIndex, Expr> rows;
      for (const auto& [s, e] : psi_[tu - 1]) rows[s] = e;
      for (const auto& [s, n] : fixed_actors) rows[s];
      for (const auto& [id, j] : vars_at_[t]) {
        if (model_.is_injection(id)) continue;
        rows[model_.event(id).actor].add(j, -1.0);
      }
      for (auto& [s, row] : rows) {
        const double target = static_cast<double>(fixed_actors.count(s)) - row.constant;
        push_row("agency_t" + std::to_string(t) + "_s" + std::to_string(s), row, target,
                 equality ? target : kInf);
      }
    }
  }

  // Presence and absence rows, plus the b variables and link rows they need.
  void condition_rows() {
    const double big_m = static_cast<double>(m_);
    std::map<std::pair<int, StateIndex>, Expr> presence, absence;
    std::set<std::pair<int, StateIndex>> forced_presence, forced_absence;

    for (int t = 1; t <= horizon_; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      for (const auto& [id, j] : vars_at_[t]) {
        const AgentEvent& e = model_.event(id);
        for (StateIndex r : e.required) presence[{t - 1, r}].add(j, -1.0);
        for (StateIndex f : e.forbidden) absence[{t - 1, f}].add(j, 1.0);
      }
      for (const auto& [id, n] : result_.map.mandatory[tu - 1]) {
        const AgentEvent& e = model_.event(id);
        for (StateIndex r : e.required) {
          presence[{t - 1, r}].constant -= static_cast<double>(n);
          forced_presence.insert({t - 1, r});
        }
        for (StateIndex f : e.forbidden) {
          absence[{t - 1, f}].constant += static_cast<double>(n);
          forced_absence.insert({t - 1, f});
        }
      }
      for (const auto& [id, n] : committed()[tu - 1]) {
        for (StateIndex f : model_.event(id).forbidden) absence[{t - 1, f}].constant += static_cast<double>(n);
      }
    }

    auto occupancy_varies = [&](int t, StateIndex s) {
      const auto& level = psi_[static_cast<std::size_t>(t)];
      auto it = level.find(s);
      return it != level.end() && it->second.has_terms();
    };

    std::set<std::pair<int, StateIndex>> needed;
    for (const auto& [key, row] : presence) {
      if (row.has_terms() || forced_presence.count(key)) needed.insert(key);
    }
    for (const auto& [key, row] : absence) {
      if (row.has_terms() || occupancy_varies(key.first, key.second) || forced_absence.count(key)) {
        needed.insert(key);
      }
    }

    for (const auto& key : needed) {
      Variable v;
      v.name = "b_t" + std::to_string(key.first) + "_s" + std::to_string(key.second);
      v.kind = VarKind::kBinary;
      v.upper = 1.0;
      int j = program().add_variable(std::move(v));
      result_.map.var_of_bool.emplace(key, j);
    }

    for (const auto& [key, row] : presence) {
      if (!needed.count(key)) continue;
      Expr e = row;
      e.add(result_.map.var_of_bool.at(key), big_m);
      pending(key, "presence", std::move(e), 0.0, kInf);
    }
    for (const auto& [key, row] : absence) {
      if (!needed.count(key)) continue;
      Expr e = row;
      e.add(result_.map.var_of_bool.at(key), big_m);
      pending(key, "absence", std::move(e), -kInf, big_m);
    }
    for (const auto& key : needed) {
      const int b = result_.map.var_of_bool.at(key);
      Expr occ;
      auto it = psi_[static_cast<std::size_t>(key.first)].find(key.second);
      if (it != psi_[static_cast<std::size_t>(key.first)].end()) occ = it->second;
      Expr hi;  // M b - Psi >= 0
      for (const auto& [j, c] : occ.terms) hi.add(j, -c);
      hi.constant = -occ.constant;
      hi.add(b, big_m);
      pending(key, "link_hi", std::move(hi), 0.0, kInf);
      Expr lo = occ;  // Psi - b >= 0
      lo.add(b, -1.0);
      pending(key, "link_lo", std::move(lo), 0.0, kInf);
    }
  }

  void pending(const std::pair<int, StateIndex>& key, const char* kind, Expr e, double lower, double upper) {
    std::string name = std::string(kind) + "_t" + std::to_string(key.first) + "_s" + std::to_string(key.second);
    // Fold constants into the bounds.
    const double c = e.constant;
    e.constant = 0.0;
    pending_rows_.push_back({std::move(name), std::move(e), lower - c, upper - c});
  }

  void push_row(std::string name, const Expr& e, double lower, double upper) {
    if (!e.has_terms() && lower <= 0.0 && 0.0 <= upper) return;
    Constraint c;
    c.name = std::move(name);
    c.terms = to_terms(e.terms);
    c.lower = lower;
    c.upper = upper;
    program().add_constraint(std::move(c));
  }

  const BehaviourModel& model_;
  const StateMultiset& initial_;
  const std::vector<Observation>& obs_;
  int horizon_;
  Count m_;
  bool online_, complete_;
  int lookback_;

  EncodedProblem result_;
  Support support_;
  std::vector<bool> variable_step_;
  std::map<int, std::vector<std::pair<EventId, int>>> vars_at_;
  std::vector<std::map<StateIndex, Expr>> psi_;
  std::vector<PendingRow> pending_rows_;
};

}  // namespace

Support reachable_support(const BehaviourModel& model, const StateMultiset& initial, int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
  Support out;
  out.states.resize(static_cast<std::size_t>(horizon) + 1);
  out.events.resize(static_cast<std::size_t>(horizon) + 1);
  std::vector<char> here(model.domain().size, 0);
  for (const auto& [s, n] : initial) {
    (void)n;
    here.at(s) = 1;
    out.states[0].push_back(s);
  }
  for (int t = 1; t <= horizon; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    std::vector<char> next(model.domain().size, 0);
    auto& live = out.events[tu];
    for (StateIndex s : out.states[tu - 1]) {
      for (EventId id : model.events_of(s)) {
        const AgentEvent& e = model.event(id);
        if (!std::all_of(e.required.begin(), e.required.end(), [&](StateIndex r) { return here[r] != 0; })) {
          continue;
        }
        live.push_back(id);
      }
    }
    for (const auto& inj : model.injections()) {
      if (inj.timestep == t) live.push_back(inj.event.id);
    }
    std::sort(live.begin(), live.end());
    for (EventId id : live) {
      for (const auto& [s, n] : model.event(id).consequence) {
        (void)n;
        next[s] = 1;
      }
    }
    for (StateIndex s = 0; s < next.size(); ++s) {
      if (next[s]) out.states[tu].push_back(s);
    }
    here = std::move(next);
  }
  return out;
}

Count default_multiplicity(const BehaviourModel& model, const StateMultiset& initial, int horizon) {
  Count m = initial.total();
  for (const auto& inj : model.injections()) {
    if (inj.timestep <= horizon) m += inj.event.consequence.total();
  }
  return std::max<Count>(m, 1);
}

EncodedProblem encode_offline(const BehaviourModel& model, const StateMultiset& initial,
                              const std::vector<Observation>& obs, int horizon, Count multiplicity) {
  return Builder(model, initial, obs, horizon, multiplicity, {}, false, false, 0).run();
}

EncodedProblem encode_online(const BehaviourModel& model, const StateMultiset& initial,
                             const std::vector<Observation>& obs, int horizon, Count multiplicity,
                             const std::vector<ModelEvent>& committed, const OnlineEncodeOptions& options) {
  if (committed.size() > static_cast<std::size_t>(std::max(horizon, 0))) {
    throw EncodingError("commitments extend beyond the horizon");
  }
  return Builder(model, initial, obs, horizon, multiplicity, committed, true, options.complete, options.lookback)
      .run();
}

Trajectory decode(const std::vector<double>& solution, const EncodingMap& map) {
  Trajectory traj;
  traj.initial = map.initial;
  traj.steps.resize(static_cast<std::size_t>(map.horizon));
  for (const auto& [key, j] : map.var_of_count) {
    const double v = solution.at(static_cast<std::size_t>(j));
    const double r = std::round(v);
    if (std::abs(v - r) > kDecodeTol) {
      std::ostringstream os;
      os << "non-integral count " << v << " for event " << key.second << " at t=" << key.first;
      throw std::runtime_error(os.str());
    }
    if (r < 0) throw std::runtime_error("negative count in solution");
    traj.steps[static_cast<std::size_t>(key.first) - 1].add(key.second, static_cast<Count>(r));
  }
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    if (t < map.committed.size()) traj.steps[t] += map.committed[t];
    if (t < map.mandatory.size()) traj.steps[t] += map.mandatory[t];
  }
  return traj;
}

std::optional<std::vector<double>> substitute(const Trajectory& traj, const BehaviourModel& model,
                                              const EncodedProblem& problem) {
  const EncodingMap& map = problem.map;
  if (traj.horizon() != static_cast<std::size_t>(map.horizon)) return std::nullopt;
  std::vector<double> x(problem.program.variables.size(), 0.0);
  for (std::size_t i = 0; i < traj.horizon(); ++i) {
    const int t = static_cast<int>(i) + 1;
    for (const auto& [id, n] : traj.steps[i]) {
      Count fixed = 0;
      if (i < map.committed.size()) fixed += map.committed[i].count(id);
      if (i < map.mandatory.size()) fixed += map.mandatory[i].count(id);
      const Count free = n - fixed;
      if (free < 0) return std::nullopt;
      if (free == 0) continue;
      auto it = map.var_of_count.find({t, id});
      if (it == map.var_of_count.end()) return std::nullopt;
      x[static_cast<std::size_t>(it->second)] = static_cast<double>(free);
    }
  }
  for (const auto& [key, j] : map.var_of_bool) {
    const StateMultiset occ = states_at(traj, static_cast<std::size_t>(key.first), model);
    x[static_cast<std::size_t>(j)] = occ.contains(key.second) ? 1.0 : 0.0;
  }
  return x;
}

}  // namespace abmap
