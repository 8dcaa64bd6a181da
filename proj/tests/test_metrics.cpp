#include "abmap/metrics.hpp"

#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using namespace abmap;
using predprey::CellState;
using predprey::Species;

namespace {

StateIndex cell(Species sp, int r, int c, int n) { return predprey::encode_state({sp, r, c}, n); }

// Distance by scanning wrapped copies of the target.
int wrapped_l1(const CellState& a, const CellState& b, int n) {
  int best = 1 << 30;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      best = std::min(best, std::abs(a.row - b.row - dr * n) + std::abs(a.col - b.col - dc * n));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("identical trajectories are at distance zero") {
  auto inst = testing::desk_instance(5, 6, 4, 6, 5, 2.0 / 3.0);
  for (const auto& row : distance_curve(inst.real, inst.real, inst.obs, inst.model, 10, 1)) {
    CHECK(row.distance.mean == 0.0);
    CHECK(row.distance.skipped == 0u);
  }
}

TEST_CASE("single pair and unmatched species") {
  const int n = 5;
  const StateMultiset real{{cell(Species::kPrey, 0, 0, n), 1}};
  const StateMultiset est{{cell(Species::kPrey, 4, 1, n), 1}, {cell(Species::kPredator, 2, 2, n), 2}};
  DistanceSample d = nearest_distance(est, real, n);
  CHECK(d.mean == 2.0);
  CHECK(d.samples == 1u);
  CHECK(d.skipped == 2u);
  CHECK(nearest_distance({}, real, n).samples == 0u);
  CHECK(nearest_distance(StateMultiset{{1, 1}}, StateMultiset{{1, 1}}, 1).mean == 0.0);
}

TEST_CASE("nearest distance matches a brute-force scan") {
  Rng rng(3);
  const int n = 6;
  for (int trial = 0; trial < 100; ++trial) {
    StateMultiset a = predprey::place_uniform(n, 1 + static_cast<Count>(rng.uniform_index(4)),
                                              static_cast<Count>(rng.uniform_index(4)), rng);
    StateMultiset b = predprey::place_uniform(n, static_cast<Count>(rng.uniform_index(4)),
                                              1 + static_cast<Count>(rng.uniform_index(4)), rng);
    double sum = 0;
    std::size_t matched = 0, skipped = 0;
    for (const auto& [s, k] : a) {
      const CellState c = predprey::decode_state(s, n);
      int best = -1;
      for (const auto& [u, m] : b) {
        const CellState o = predprey::decode_state(u, n);
        if (o.species != c.species) continue;
        const int d = wrapped_l1(c, o, n);
        if (best < 0 || d < best) best = d;
      }
      if (best < 0) {
        skipped += static_cast<std::size_t>(k);
      } else {
        sum += best * static_cast<double>(k);
        matched += static_cast<std::size_t>(k);
      }
    }
    DistanceSample d = nearest_distance(a, b, n);
    CHECK(d.samples == matched);
    CHECK(d.skipped == skipped);
    CHECK(d.mean == doctest::Approx(matched ? sum / static_cast<double>(matched) : 0.0));
  }
}

TEST_CASE("single-state lower bounds are removed from the unobserved set") {
  const StateMultiset occ{{3, 4}, {5, 1}, {7, 2}};
  const std::vector<Observation> obs{
      {2, 2, kUnbounded, {3}}, {2, 3, kUnbounded, {3}}, {2, 2, kUnbounded, {5}},
      {2, 2, kUnbounded, {7, 8}},  // multi-state, ignored
      {1, 2, kUnbounded, {7}},     // other time
  };
  CHECK(unobserved_states(occ, obs, 2) == StateMultiset{{3, 1}, {7, 2}});
}

TEST_CASE("random baseline on a large torus matches the analytic mean") {
  const int n = 32;
  predprey::Config cfg;
  cfg.grid_size = n;
  const BehaviourModel m = predprey::build_model(cfg);
  const Trajectory real{StateMultiset{{cell(Species::kPrey, 7, 19, n), 1}}, {}};
  // Exact mean and spread of the distance to a uniformly placed point.
  double mean = 0, sq = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d = wrapped_l1({Species::kPrey, r, c}, {Species::kPrey, 7, 19}, n);
      mean += d;
      sq += d * d;
    }
  }
  mean /= n * n;
  const double sd = std::sqrt(sq / (n * n) - mean * mean);
  CHECK(mean == 16.0);
  const std::size_t samples = 4000;
  const double b = random_baseline(real, {}, 0, m, samples, 77);
  CHECK(std::abs(b - mean) < 3 * sd / std::sqrt(static_cast<double>(samples)));
  CHECK(random_baseline(real, {}, 0, m, samples, 77) == b);
  CHECK(random_baseline(real, {}, 0, m, samples, 78) != b);
  // Everything observed leaves nothing to place.
  CHECK(random_baseline(real, {{0, 1, kUnbounded, {cell(Species::kPrey, 7, 19, n)}}}, 0, m, 10, 1) == 0.0);
}

TEST_CASE("log ratio is antisymmetric and zero on itself") {
  auto a = testing::desk_instance(1, 5, 3, 4, 4, 1.0);
  auto b = testing::desk_instance(2, 5, 3, 4, 4, 1.0);
  const Trajectory tb{a.real.initial, {}};
  CHECK(log_ratio(a.real, a.real, a.model) == 0.0);
  CHECK(log_ratio(a.real, b.real, a.model) == doctest::Approx(-log_ratio(b.real, a.real, a.model)));
  CHECK(log_ratio(a.real, tb, a.model) == doctest::Approx(log_probability(a.real, a.model)));
}

TEST_CASE("curve rows, seeds and csv layout") {
  auto inst = testing::desk_instance(8, 5, 3, 5, 3, 2.0 / 3.0);
  auto est = testing::desk_instance(9, 5, 3, 5, 3, 2.0 / 3.0);
  const auto rows = distance_curve(inst.real, est.real, inst.obs, inst.model, 50, 4);
  REQUIRE(rows.size() == 3u);
  for (int t = 1; t <= 3; ++t) {
    CHECK(rows[static_cast<std::size_t>(t) - 1].t == t);
    CHECK(rows[static_cast<std::size_t>(t) - 1].baseline ==
          random_baseline(inst.real, inst.obs, t, inst.model, 50, derive_seed(4, static_cast<std::uint64_t>(t))));
  }
  std::ostringstream os;
  write_metrics_csv(os, {{1, {1.5, 3, 0}, 2.25}}, -0.5);
  CHECK(os.str() == "t,mean_distance,n_samples,baseline\n1,1.5,3,2.25\n# log_ratio=-0.5\n");
  CHECK_THROWS_AS(unobserved_distance(inst.real, est.real, inst.obs, 4, inst.model), std::out_of_range);
  CHECK_THROWS_AS(distance_curve(inst.real, Trajectory{inst.real.initial, {}}, inst.obs, inst.model, 5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(grid_size_of(testing::garden_path_model()), std::invalid_argument);
}
