#include "abmap/encode.hpp"

#include "abmap/milp.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace abmap;

namespace {

// Interacting model plus an optional z arrival at t=1 and a certain x
// arrival at t=2.
BehaviourModel injecting_model() {
  BehaviourModel base = testing::interacting_model();
  std::vector<Injection> inj;
  inj.push_back({1, {20, kZeroEnergyActor, {}, {}, StateMultiset{{2, 1}}, 0.3, "z arrives"}});
  inj.push_back({2, {21, kZeroEnergyActor, {}, {}, StateMultiset{{0, 1}}, 1.0, "x arrives"}});
  return BehaviourModel(base.domain(), base.events(), inj);
}

std::vector<Trajectory> feasible_trajectories(const BehaviourModel& m, const StateMultiset& init, int horizon,
                                              const std::vector<Observation>& obs) {
  std::vector<Trajectory> out;
  testing::enumerate_trajectories(m, init, horizon, [&](const Trajectory& t) {
    if (check_feasible(t, m, Feasibility::kComplete).empty() && satisfies(t, obs, m).empty()) out.push_back(t);
  });
  return out;
}

// Observations drawn around the states of `truth`, so they are satisfiable.
std::vector<Observation> random_observations(const Trajectory& truth, const BehaviourModel& m, Rng& rng) {
  std::vector<Observation> obs;
  const auto n = static_cast<StateIndex>(m.domain().size);
  for (std::size_t t = 0; t <= truth.horizon(); ++t) {
    if (rng.uniform01() < 0.35) continue;
    Observation o;
    o.timestep = static_cast<int>(t);
    for (StateIndex s = 0; s < n; ++s) {
      if (rng.uniform01() < 0.5) o.predicate.push_back(s);
    }
    if (o.predicate.empty()) o.predicate.push_back(static_cast<StateIndex>(rng.uniform_index(n)));
    const Count c = count_matching(states_at(truth, t, m), o.predicate);
    o.lower = std::max<Count>(0, c - static_cast<Count>(rng.uniform_index(2)));
    if (rng.uniform01() < 0.5) o.upper = c + static_cast<Count>(rng.uniform_index(2));
    obs.push_back(o);
  }
  return obs;
}

// Number of integer points satisfying every row, by exhaustive search.
std::size_t count_points(const IntegerProgram& p) {
  const std::size_t n = p.variables.size();
  double box = 1;
  for (const auto& v : p.variables) box *= v.upper - v.lower + 1;
  REQUIRE(box < 5e6);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = p.variables[j].lower;
  std::size_t hits = 0;
  for (;;) {
    if (point_violations(p, x, 1e-9).empty()) ++hits;
    std::size_t j = 0;
    while (j < n && x[j] >= p.variables[j].upper) {
      x[j] = p.variables[j].lower;
      ++j;
    }
    if (j == n) return hits;
    x[j] += 1.0;
  }
}

void check_against_brute_force(const BehaviourModel& m, const StateMultiset& init, int horizon,
                               const std::vector<Observation>& obs, Count mult) {
  const auto all = feasible_trajectories(m, init, horizon, obs);
  const EncodedProblem enc = encode_offline(m, init, obs, horizon, mult);
  const MilpResult r = solve_milp(enc.program);
  if (all.empty()) {
    CHECK(r.status == MilpStatus::kInfeasible);
    return;
  }
  double best = -kInf;
  for (const auto& t : all) {
    best = std::max(best, log_probability(t, m));
    // Every feasible trajectory is a feasible point with the same objective.
    auto x = substitute(t, m, enc);
    REQUIRE(x.has_value());
    CHECK(point_violations(enc.program, *x).empty());
    CHECK(enc.program.objective_value(*x) == doctest::Approx(log_probability(t, m)));
    CHECK(decode(*x, enc.map) == t);
  }
  REQUIRE(r.status == MilpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(best));
  const Trajectory map = decode(r.incumbent, enc.map);
  CHECK(check_feasible(map, m, Feasibility::kComplete).empty());
  CHECK(satisfies(map, obs, m).empty());
  CHECK(log_probability(map, m) == doctest::Approx(best));
}

}  // namespace

TEST_CASE("garden path: feasible points and trajectories are in bijection") {
  const BehaviourModel m = testing::garden_path_model();
  const StateMultiset init{{0, 2}};
  const EncodedProblem enc = encode_offline(m, init, {}, 2, 2);
  CHECK(count_points(enc.program) == feasible_trajectories(m, init, 2, {}).size());
  check_against_brute_force(m, init, 2, {}, 2);
  check_against_brute_force(m, init, 2, {{2, 1, kUnbounded, {2}}}, 2);
}

TEST_CASE("interacting model: feasible points and trajectories are in bijection") {
  const BehaviourModel m = testing::interacting_model();
  for (const StateMultiset& init : {StateMultiset{{0, 1}, {2, 1}}, StateMultiset{{0, 1}, {1, 1}}}) {
    const EncodedProblem enc = encode_offline(m, init, {}, 1, 3);
    CHECK(count_points(enc.program) == feasible_trajectories(m, init, 1, {}).size());
  }
  const StateMultiset init{{0, 1}, {2, 1}};
  const std::vector<Observation> obs{{1, 1, 1, {0, 1}}};
  const EncodedProblem enc = encode_offline(m, init, obs, 1, 3);
  CHECK(count_points(enc.program) == feasible_trajectories(m, init, 1, obs).size());
}

TEST_CASE("interacting model MAP matches brute force under random observations") {
  const BehaviourModel m = testing::interacting_model();
  Rng rng(8);
  const StateMultiset inits[] = {StateMultiset{{0, 1}, {1, 1}, {2, 1}}, StateMultiset{{0, 2}, {2, 1}},
                                 StateMultiset{{1, 1}}, StateMultiset{{0, 1}, {1, 1}}};
  for (int trial = 0; trial < 40; ++trial) {
    const StateMultiset& init = inits[trial % 4];
    const int horizon = init.total() >= 3 ? 2 : 3;
    const auto all = feasible_trajectories(m, init, horizon, {});
    REQUIRE(!all.empty());
    const Trajectory& truth = all[rng.uniform_index(all.size())];
    const auto obs = random_observations(truth, m, rng);
    check_against_brute_force(m, init, horizon, obs, 12);
  }
}

TEST_CASE("injections: optional arrivals are binary and certain ones are constants") {
  const BehaviourModel m = injecting_model();
  const StateMultiset init{{0, 1}};
  const EncodedProblem enc = encode_offline(m, init, {}, 2, default_multiplicity(m, init, 2));
  CHECK(enc.map.multiplicity == 3);
  CHECK(enc.map.var_of_count.count({1, 20}) == 1);
  CHECK(enc.map.var_of_count.count({2, 21}) == 0);
  REQUIRE(enc.map.mandatory.size() == 2u);
  CHECK(enc.map.mandatory[1] == ModelEvent{{21, 1}});
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto all = feasible_trajectories(m, init, 2, {});
    const auto obs = random_observations(all[rng.uniform_index(all.size())], m, rng);
    check_against_brute_force(m, init, 2, obs, 8);
  }
  // An observation of z at t=1 forces the optional arrival or nothing.
  check_against_brute_force(m, StateMultiset{{1, 1}}, 2, {{1, 1, kUnbounded, {2}}}, 8);
}

TEST_CASE("predator-prey on the smallest grid matches brute force") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto inst = testing::desk_instance(seed, 3, 1, 1, 2, seed % 2 ? 1.0 : 2.0 / 3.0);
    check_against_brute_force(inst.model, inst.real.initial, 2, inst.obs, 8);
  }
}

TEST_CASE("reachable support only includes enabled-looking events") {
  const BehaviourModel m = testing::garden_path_model();
  const Support s = reachable_support(m, StateMultiset{{0, 1}}, 3);
  REQUIRE(s.states.size() == 4u);
  CHECK(s.states[0] == std::vector<StateIndex>{0});
  CHECK(s.states[1] == std::vector<StateIndex>{1, 2});
  CHECK(s.events[1] == std::vector<EventId>{0, 1});
  CHECK(s.events[2] == std::vector<EventId>{2, 3});
  // x->z needs z somewhere; with no z reachable it never gets a variable.
  const BehaviourModel im = testing::interacting_model();
  const Support si = reachable_support(im, StateMultiset{{0, 1}}, 2);
  for (const auto& step : si.events) {
    CHECK(std::find(step.begin(), step.end(), EventId{3}) == step.end());
  }
}

TEST_CASE("completion with commitments matches a filtered brute force") {
  const BehaviourModel m = testing::interacting_model();
  Rng rng(12);
  const StateMultiset init{{0, 1}, {1, 1}, {2, 1}};
  const auto all = feasible_trajectories(m, init, 2, {});
  for (int trial = 0; trial < 25; ++trial) {
    const Trajectory& truth = all[rng.uniform_index(all.size())];
    const auto obs = random_observations(truth, m, rng);
    // Commit a random sub-multiset of the first step.
    std::vector<ModelEvent> committed(1);
    for (const auto& [id, k] : truth.steps[0]) {
      if (rng.uniform01() < 0.6) committed[0].add(id, k);
    }
    OnlineEncodeOptions opt;
    opt.complete = true;
    const EncodedProblem enc = encode_online(m, init, obs, 2, 12, committed, opt);
    double best = -kInf;
    for (const auto& t : feasible_trajectories(m, init, 2, obs)) {
      bool extends = true;
      for (const auto& [id, k] : committed[0]) extends = extends && t.steps[0].count(id) >= k;
      if (!extends) continue;
      best = std::max(best, log_probability(t, m));
      auto x = substitute(t, m, enc);
      REQUIRE(x.has_value());
      CHECK(point_violations(enc.program, *x).empty());
    }
    REQUIRE(best > -kInf);  // the truth itself extends the commitment
    const MilpResult r = solve_milp(enc.program);
    REQUIRE(r.status == MilpStatus::kOptimal);
    const Trajectory full = decode(r.incumbent, enc.map);
    CHECK(log_probability(full, m) == doctest::Approx(best));
    CHECK(check_feasible(full, m, Feasibility::kComplete).empty());
    CHECK(satisfies(full, obs, m).empty());
  }
}

TEST_CASE("online encoding yields partial trajectories that extend the commitments") {
  auto inst = testing::desk_instance(17, 4, 2, 3, 3, 1.0);
  const std::vector<ModelEvent> committed{inst.real.steps[0]};
  const EncodedProblem enc = encode_online(inst.model, inst.real.initial, inst.obs, 3, 20, committed);
  // The real trajectory is a feasible point.
  auto x = substitute(inst.real, inst.model, enc);
  REQUIRE(x.has_value());
  CHECK(point_violations(enc.program, *x).empty());
  const MilpResult r = solve_milp(enc.program);
  REQUIRE(r.status == MilpStatus::kOptimal);
  const Trajectory t = decode(r.incumbent, enc.map);
  CHECK(check_feasible(t, inst.model, Feasibility::kPartial).empty());
  CHECK(t.steps[0] == inst.real.steps[0]);
  CHECK(r.objective >= log_probability(inst.real, inst.model) - log_probability(Trajectory{inst.real.initial, committed}, inst.model) - 1e-9);

  // Without observations doing nothing is optimal.
  const EncodedProblem quiet = encode_online(inst.model, inst.real.initial, {}, 3, 20, committed);
  const MilpResult q = solve_milp(quiet.program);
  REQUIRE(q.status == MilpStatus::kOptimal);
  CHECK(q.objective == doctest::Approx(0.0));
}

TEST_CASE("inconsistent inputs raise encoding errors") {
  const BehaviourModel m = testing::garden_path_model();
  const StateMultiset init{{0, 2}};
  CHECK_THROWS_AS(encode_offline(m, init, {}, 2, 0), EncodingError);
  CHECK_THROWS_AS(encode_offline(m, init, {}, 2, 1), EncodingError);
  CHECK_THROWS_AS(encode_offline(m, init, {{3, 1, kUnbounded, {1}}}, 2, 2), EncodingError);
  CHECK_THROWS_AS(encode_offline(m, StateMultiset{{7, 1}}, {}, 2, 2), EncodingError);
  // Committing a behaviour of an absent agent.
  CHECK_THROWS_AS(encode_online(m, init, {}, 2, 2, {ModelEvent{{2, 1}}}), EncodingError);
  CHECK_THROWS_AS(encode_online(m, init, {}, 1, 2, {ModelEvent{{0, 1}}, ModelEvent{{2, 1}}}), EncodingError);
}

TEST_CASE("an observation contradicting the initial state makes the program infeasible") {
  const BehaviourModel m = testing::garden_path_model();
  const EncodedProblem enc = encode_offline(m, StateMultiset{{0, 1}}, {{0, 2, kUnbounded, {0}}}, 1, 2);
  CHECK(solve_milp(enc.program).status == MilpStatus::kInfeasible);
  const EncodedProblem ok = encode_offline(m, StateMultiset{{0, 1}}, {{0, 1, 1, {0}}}, 1, 2);
  CHECK(solve_milp(ok.program).status == MilpStatus::kOptimal);
}

TEST_CASE("decode rejects fractional solutions and names variables predictably") {
  const BehaviourModel m = testing::garden_path_model();
  const EncodedProblem enc = encode_offline(m, StateMultiset{{0, 1}}, {}, 1, 1);
  std::vector<double> x(enc.program.variables.size(), 0.0);
  x[0] = 0.5;
  CHECK_THROWS_AS(decode(x, enc.map), std::runtime_error);
  const int var = enc.map.var_of_count.at({1, 0});
  CHECK(enc.program.variables[static_cast<std::size_t>(var)].name == "c_t1_e0");
  CHECK(enc.program.variables[static_cast<std::size_t>(var)].objective == doctest::Approx(std::log(0.9)));
}
