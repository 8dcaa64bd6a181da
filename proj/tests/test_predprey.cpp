#include <set>

#include "doctest.h"
#include "test_support.hpp"

using namespace abmap;
using namespace abmap::predprey;

namespace {

double enabled_mass(const BehaviourModel& m, StateIndex actor, const StateMultiset& env, bool eaten_only,
                    StateIndex eaten_state) {
  double p = 0.0;
  for (EventId id : m.events_of(actor)) {
    const AgentEvent& e = m.event(id);
    if (!enabled_in(e, env)) continue;
    if (eaten_only && !(e.consequence == StateMultiset{{eaten_state, 1}})) continue;
    p += e.probability;
  }
  return p;
}

}  // namespace

TEST_CASE("state index round trip and torus neighbours") {
  const int n = 5;
  std::set<StateIndex> seen;
  for (int sp = 0; sp < 2; ++sp) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        CellState cell{static_cast<Species>(sp), r, c};
        StateIndex s = encode_state(cell, n);
        CHECK(decode_state(s, n) == cell);
        seen.insert(s);
        for (Direction d : kDirections) CHECK(torus_l1(cell, neighbour(cell, d, n), n) == 1);
      }
    }
  }
  CHECK(seen.size() == 2u * n * n);
  CHECK(*seen.rbegin() == 2u * n * n - 1);
  CHECK(neighbour({Species::kPrey, 0, 0}, Direction::kUp, n) == CellState{Species::kPrey, 4, 0});
  CHECK(neighbour({Species::kPrey, 0, 4}, Direction::kRight, n) == CellState{Species::kPrey, 0, 0});
  CHECK_THROWS_AS(decode_state(2 * n * n, n), std::out_of_range);
}

TEST_CASE("torus distance is a metric bounded by the grid") {
  const int n = 6;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto pick = [&] {
      return CellState{Species::kPrey, static_cast<int>(rng.uniform_index(n)), static_cast<int>(rng.uniform_index(n))};
    };
    CellState a = pick(), b = pick(), c = pick();
    CHECK(torus_l1(a, b, n) == torus_l1(b, a, n));
    CHECK(torus_l1(a, c, n) <= torus_l1(a, b, n) + torus_l1(b, c, n));
    CHECK(torus_l1(a, b, n) <= n);
    // Brute force over wrapped offsets.
    int best = 1 << 30;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        best = std::min(best, std::abs(a.row - b.row + dr * n) + std::abs(a.col - b.col + dc * n));
      }
    }
    CHECK(torus_l1(a, b, n) == best);
  }
}

TEST_CASE("default rates build a normalized model with the expected event counts") {
  Config cfg;
  cfg.grid_size = 4;
  const BehaviourModel m = build_model(cfg);
  CHECK(m.domain().size == 32u);
  CHECK(m.events().size() == 16u * 6 + 16u * 18);
  for (StateIndex s = 0; s < 16; ++s) CHECK(m.events_of(s).size() == 6u);
  for (StateIndex s = 16; s < 32; ++s) CHECK(m.events_of(s).size() == 18u);
  CHECK(max_normalization_error(m) < 1e-12);
  for (std::size_t k = 0; k < m.events().size(); ++k) CHECK(m.events()[k].id == k);
}

TEST_CASE("every neighbourhood of a prey sums to one, and eating probability matches its closed form") {
  const int n = 4;
  Config cfg;
  cfg.grid_size = n;
  const BehaviourModel m = build_model(cfg);
  const CellState prey{Species::kPrey, 1, 2};
  const StateIndex x = encode_state(prey, n);
  const StateIndex eaten = encode_state({Species::kPredator, 1, 2}, n);
  for (int mask = 0; mask < 16; ++mask) {
    StateMultiset env{{x, 1}};
    int k = 0;
    for (Direction d : kDirections) {
      if (mask & (1 << static_cast<int>(d))) {
        const CellState nb = neighbour(prey, d, n);
        env.add(encode_state({Species::kPredator, nb.row, nb.col}, n));
        ++k;
      }
    }
    CHECK(enabled_mass(m, x, env, false, 0) == doctest::Approx(1.0).epsilon(1e-12));
    const double expected = 0.182 * k + (k > 0 ? 0.182 : 0.0);
    CHECK(enabled_mass(m, x, env, true, eaten) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("zero rates drop events and bad configurations are rejected") {
  Config cfg;
  cfg.grid_size = 3;
  cfg.rates.prey_reproduce = 0.0;
  cfg.rates.prey_die = 0.09;
  const BehaviourModel m = build_model(cfg);
  CHECK(m.events_of(9).size() == 14u);

  Config small;
  small.grid_size = 2;
  CHECK_THROWS_AS(build_model(small), std::invalid_argument);
  Config bad;
  bad.grid_size = 4;
  bad.rates.predator_die = 0.5;
  CHECK_THROWS_AS(build_model(bad), std::invalid_argument);
  bad.rates = Rates{};
  bad.rates.prey_move = -0.1;
  CHECK_THROWS_AS(build_model(bad), std::invalid_argument);
}

TEST_CASE("uniform placement puts the right number of each species on the grid") {
  Rng rng(11);
  const StateMultiset s = place_uniform(6, 7, 9, rng);
  Count pred = 0, prey = 0;
  for (const auto& [state, k] : s) {
    (decode_state(state, 6).species == Species::kPredator ? pred : prey) += k;
  }
  CHECK(pred == 7);
  CHECK(prey == 9);
}
