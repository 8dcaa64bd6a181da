#include "abmap/file_formats.hpp"

#include <filesystem>

#include "doctest.h"
#include "test_support.hpp"

using namespace abmap;
using namespace abmap::io;

namespace {

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("config round trip with both kinds of initial state") {
  RunConfig c;
  c.model.grid_size = 6;
  c.model.rates.prey_die = 0.04;
  c.model.rates.prey_reproduce = 0.05;
  c.sim.seed = 123456789012345ULL;
  c.sim.timesteps = 4;
  c.sim.initial = UniformPlacement{6, 3, 5};
  c.sim.observe_prob = 0.5;
  c.multiplicity = 12;
  c.window = 2;
  c.lookback = 3;
  c.evasion_threshold = 0.01;
  const std::string text = format_config(c);
  const RunConfig back = parse_config(text);
  CHECK(format_config(back) == text);
  CHECK(back.sim.seed == c.sim.seed);
  CHECK(back.model.rates == c.model.rates);
  CHECK(std::get<UniformPlacement>(back.sim.initial).prey == 5);

  c.sim.initial = StateMultiset{{0, 2}, {40, 1}};
  const RunConfig explicit_init = parse_config(format_config(c));
  CHECK(std::get<StateMultiset>(explicit_init.sim.initial) == StateMultiset{{0, 2}, {40, 1}});
}

TEST_CASE("boundary, trajectory and observations round trip") {
  auto inst = testing::desk_instance(4, 5, 3, 4, 3, 2.0 / 3.0);
  const std::size_t domain = inst.model.domain().size;
  Boundary b{inst.config, inst.real.initial, 3, 2.0 / 3.0};
  const Boundary bb = parse_boundary(format_boundary(b));
  CHECK(bb.initial == b.initial);
  CHECK(bb.timesteps == 3);
  CHECK(bb.observe_prob == b.observe_prob);
  CHECK(bb.model.grid_size == 5);

  CHECK(parse_trajectory(format_trajectory(inst.real, inst.config), domain) == inst.real);
  std::vector<Observation> obs = inst.obs;
  obs.push_back({0, 0, 3, {1, 2, 30}});
  CHECK(parse_observations(format_observations(obs, domain), domain) == obs);
}

TEST_CASE("stream state round trip") {
  AssimilationState s;
  s.initial = StateMultiset{{1, 2}, {9, 1}};
  s.multiplicity = 7;
  s.window = 2;
  s.lookback = 1;
  s.committed = {ModelEvent{{3, 1}}, ModelEvent{}, ModelEvent{{5, 2}}};
  s.horizon_processed = 3;
  s.rollback_count = 4;
  s.observations = {{1, 1, kUnbounded, {2}}, {3, 0, 2, {4, 5}}};
  const std::string text = format_stream_state(s, 50);
  CHECK(parse_stream_state(text, 50) == s);
  CHECK_THROWS_AS(parse_stream_state(text, 32), FormatError);
}

TEST_CASE("malformed files are rejected with format errors") {
  auto inst = testing::desk_instance(4, 4, 2, 2, 2, 1.0);
  const std::size_t domain = inst.model.domain().size;
  const std::string obs = format_observations(inst.obs, domain);
  const std::string traj = format_trajectory(inst.real, inst.config);
  const std::string cfg = format_config(RunConfig{});

  CHECK_THROWS_AS(parse_observations("{", domain), FormatError);
  CHECK_THROWS_AS(parse_observations("[]", domain), FormatError);
  CHECK_THROWS_AS(parse_observations(traj, domain), FormatError);  // wrong format tag
  CHECK_THROWS_AS(parse_observations(replace(obs, "\"version\": 1", "\"version\": 2"), domain), FormatError);
  CHECK_THROWS_AS(parse_observations(obs, domain + 2), FormatError);
  CHECK_THROWS_AS(parse_observations(replace(obs, "\"format\"", "\"extra\": 1,\n\"format\""), domain), FormatError);

  const std::string one = format_observations({{1, 0, 2, {3}}}, domain);
  CHECK_THROWS_AS(parse_observations(replace(one, "\"L\": 0", "\"L\": 3"), domain), FormatError);
  CHECK_THROWS_AS(parse_observations(replace(one, "\"L\": 0", "\"L\": -1"), domain), FormatError);
  CHECK_THROWS_AS(parse_observations(replace(one, "\"L\": 0", "\"L\": 0.5"), domain), FormatError);
  CHECK_THROWS_AS(parse_observations(replace(one, "3\n", "99\n"), domain), FormatError);
  CHECK_THROWS_AS(parse_observations(replace(one, "\"t\": 1", "\"t\": -1"), domain), FormatError);

  CHECK_THROWS_AS(parse_config(replace(cfg, "\"window\": 7", "\"window\": 0")), FormatError);
  CHECK_THROWS_AS(parse_config(replace(cfg, "\"prey_die\": 0.03", "\"prey_die\": 0.5")), FormatError);
  CHECK_THROWS_AS(parse_config(replace(cfg, "\"grid_size\": 32", "\"grid_size\": \"32\"")), FormatError);
  CHECK_THROWS_AS(parse_config(replace(cfg, "\"seed\": 1", "\"seed\": -1")), FormatError);
  CHECK_THROWS_AS(parse_trajectory(replace(traj, "\"grid_size\": 4", "\"grid_size\": 5"), domain), FormatError);
}

TEST_CASE("file helpers report unreadable paths") {
  const auto dir = std::filesystem::temp_directory_path() / "abmap_ff_test";
  std::filesystem::create_directories(dir);
  write_file(dir / "x.json", "hello\n");
  CHECK(read_file(dir / "x.json") == "hello\n");
  CHECK_THROWS_AS(read_file(dir / "missing.json"), FormatError);
  CHECK_THROWS_AS(write_file(dir / "no" / "such" / "x.json", "a"), FormatError);
  std::filesystem::remove_all(dir);
}
