#pragma once

// JSON file formats. Every file carries a "format" tag, a version and the
// size of the state domain it refers to.
//
//   abmap-config        simulation and assimilation settings
//   abmap-boundary      predator-prey parameters, initial state and horizon
//   abmap-trajectory    initial multiset and per-step [event id, count] lists
//   abmap-observations  {t, L, U|null, states}
//   abmap-stream-state  persisted online assimilation state

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmap/assimilate.hpp"
#include "abmap/core_model.hpp"
#include "abmap/predprey.hpp"
#include "abmap/simulate.hpp"

namespace abmap::io {

inline constexpr int kFormatVersion = 1;

/// Malformed or inconsistent input file.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  predprey::Config model;
  SimConfig sim;
  Count multiplicity = 0;  // 0 = encoder default
  int window = 7;
  int lookback = 0;
  double evasion_threshold = 0.0;  // 0 disables departures
};

struct Boundary {
  predprey::Config model;
  StateMultiset initial;
  int timesteps = 0;
  double observe_prob = 2.0 / 3.0;
};

RunConfig parse_config(const std::string& text);
std::string format_config(const RunConfig& cfg);

Boundary parse_boundary(const std::string& text);
std::string format_boundary(const Boundary& b);

Trajectory parse_trajectory(const std::string& text, std::size_t domain_size);
std::string format_trajectory(const Trajectory& traj, const predprey::Config& model);

std::vector<Observation> parse_observations(const std::string& text, std::size_t domain_size);
std::string format_observations(const std::vector<Observation>& obs, std::size_t domain_size);

AssimilationState parse_stream_state(const std::string& text, std::size_t domain_size);
std::string format_stream_state(const AssimilationState& state, std::size_t domain_size);

/// Whole-file helpers; throw FormatError if the file cannot be read or written.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace abmap::io
