#include "abmap/file_formats.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"

namespace abmap::io {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

void expect_format(const json& j, const char* name) {
  if (!j.is_object()) throw FormatError(std::string(name) + ": top level must be an object");
  if (j.value("format", std::string()) != name) throw FormatError(std::string("expected format \"") + name + "\"");
  if (j.value("version", 0) != kFormatVersion) {
    throw FormatError(std::string(name) + ": unsupported version");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw FormatError(std::string(where) + ": unknown key \"" + item.key() + "\"");
  }
}

// nlohmann converts 0.5 to int and -1 to unsigned without complaint.
template <class T>
bool kind_ok(const json& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v.is_boolean();
  } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    return v.is_number_unsigned();
  } else if constexpr (std::is_integral_v<T>) {
    return v.is_number_integer();
  } else if constexpr (std::is_floating_point_v<T>) {
    return v.is_number();
  } else if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string> &&
                       !std::is_same_v<T, json>) {
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (!kind_ok<typename T::value_type>(e)) return false;
    }
    return true;
  } else {
    return true;
  }
}

template <class T>
T get(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw FormatError(std::string(where) + ": missing \"" + key + "\"");
  if (!kind_ok<T>(j.at(key))) throw FormatError(std::string(where) + ": bad value for \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string(where) + ": bad value for \"" + key + "\"");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const char* where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

void check_domain(const json& j, std::size_t domain_size, const char* where) {
  if (get<std::size_t>(j, "domain_size", where) != domain_size) {
    throw FormatError(std::string(where) + ": domain size does not match the model");
  }
}

template <class Key>
json counts_to_json(const CountMap<Key>& m) {
  json arr = json::array();
  for (const auto& [k, n] : m) arr.push_back(json::array({k, n}));
  return arr;
}

template <class Key>
CountMap<Key> counts_from_json(const json& arr, std::size_t key_limit, const char* where) {
  if (!arr.is_array()) throw FormatError(std::string(where) + ": expected a list of [key, count] pairs");
  CountMap<Key> out;
  for (const auto& pair : arr) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() || !pair[1].is_number_integer()) {
      throw FormatError(std::string(where) + ": malformed [key, count] pair");
    }
    const auto key = pair[0].get<std::uint64_t>();
    const auto n = pair[1].get<Count>();
    if (key >= key_limit) throw FormatError(std::string(where) + ": key " + std::to_string(key) + " out of range");
    if (n <= 0) throw FormatError(std::string(where) + ": counts must be positive");
    if (out.contains(static_cast<Key>(key))) throw FormatError(std::string(where) + ": duplicate key");
    out.add(static_cast<Key>(key), n);
  }
  return out;
}

json rates_to_json(const predprey::Rates& r) {
  return json{{"prey_die", r.prey_die},         {"prey_reproduce", r.prey_reproduce},
              {"prey_move", r.prey_move},       {"prey_stay", r.prey_stay},
              {"predator_die", r.predator_die}, {"predator_move", r.predator_move},
              {"predator_stay", r.predator_stay}};
}

predprey::Rates rates_from_json(const json& j) {
  const char* where = "rates";
  if (!j.is_object()) throw FormatError("rates must be an object");
  reject_unknown(j,
                 {"prey_die", "prey_reproduce", "prey_move", "prey_stay", "predator_die", "predator_move",
                  "predator_stay"},
                 where);
  predprey::Rates r;
  r.prey_die = get_or(j, "prey_die", r.prey_die, where);
  r.prey_reproduce = get_or(j, "prey_reproduce", r.prey_reproduce, where);
  r.prey_move = get_or(j, "prey_move", r.prey_move, where);
  r.prey_stay = get_or(j, "prey_stay", r.prey_stay, where);
  r.predator_die = get_or(j, "predator_die", r.predator_die, where);
  r.predator_move = get_or(j, "predator_move", r.predator_move, where);
  r.predator_stay = get_or(j, "predator_stay", r.predator_stay, where);
  return r;
}

std::size_t domain_size_of(const predprey::Config& m) {
  return 2 * static_cast<std::size_t>(m.grid_size) * static_cast<std::size_t>(m.grid_size);
}

void validate_model(const predprey::Config& m) {
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

json observation_to_json(const Observation& o) {
  json j{{"t", o.timestep}, {"L", o.lower}};
  j["U"] = o.unbounded() ? json(nullptr) : json(o.upper);
  j["states"] = o.predicate;
  return j;
}

Observation observation_from_json(const json& j, std::size_t domain_size) {
  const char* where = "observation";
  if (!j.is_object()) throw FormatError("observation must be an object");
  reject_unknown(j, {"t", "L", "U", "states"}, where);
  Observation o;
  o.timestep = get<int>(j, "t", where);
  o.lower = get<Count>(j, "L", where);
  o.upper = j.contains("U") && !j.at("U").is_null() ? get<Count>(j, "U", where) : kUnbounded;
  o.predicate = get<std::vector<StateIndex>>(j, "states", where);
  if (o.timestep < 0) throw FormatError("observation timestep must be non-negative");
  if (o.lower < 0 || o.upper < o.lower) throw FormatError("observation bounds must satisfy 0 <= L <= U");
  std::set<StateIndex> uniq(o.predicate.begin(), o.predicate.end());
  if (uniq.size() != o.predicate.size()) throw FormatError("observation states must be distinct");
  for (StateIndex s : o.predicate) {
    if (s >= domain_size) throw FormatError("observation state " + std::to_string(s) + " out of range");
  }
  o.predicate.assign(uniq.begin(), uniq.end());
  return o;
}

std::vector<ModelEvent> steps_from_json(const json& arr, const char* where) {
  if (!arr.is_array()) throw FormatError(std::string(where) + ": steps must be a list");
  std::vector<ModelEvent> steps;
  for (const auto& step : arr) {
    steps.push_back(counts_from_json<EventId>(step, std::numeric_limits<EventId>::max(), where));
  }
  return steps;
}

json steps_to_json(const std::vector<ModelEvent>& steps) {
  json arr = json::array();
  for (const auto& step : steps) arr.push_back(counts_to_json(step));
  return arr;
}

std::string dump(const json& j) { return j.dump(1, '\t') + "\n"; }

}  // namespace

RunConfig parse_config(const std::string& text) {
  const char* where = "config";
  json j = parse_json(text);
  expect_format(j, "abmap-config");
  reject_unknown(j,
                 {"format", "version", "grid_size", "rates", "seed", "timesteps", "initial", "observe_prob",
                  "multiplicity", "window", "lookback", "evasion_threshold"},
                 where);
  RunConfig cfg;
  cfg.model.grid_size = get_or(j, "grid_size", cfg.model.grid_size, where);
  if (j.contains("rates")) cfg.model.rates = rates_from_json(j.at("rates"));
  validate_model(cfg.model);

  cfg.sim.seed = get_or<std::uint64_t>(j, "seed", cfg.sim.seed, where);
  cfg.sim.timesteps = get_or(j, "timesteps", cfg.sim.timesteps, where);
  cfg.sim.observe_prob = get_or(j, "observe_prob", cfg.sim.observe_prob, where);
  UniformPlacement place{cfg.model.grid_size, 40, 60};
  cfg.sim.initial = place;
  if (j.contains("initial")) {
    const json& init = j.at("initial");
    if (!init.is_object()) throw FormatError("initial must be an object");
    reject_unknown(init, {"predators", "prey", "states"}, "initial");
    if (init.contains("states")) {
      if (init.contains("predators") || init.contains("prey")) {
        throw FormatError("initial: give either states or predators/prey counts");
      }
      cfg.sim.initial = counts_from_json<StateIndex>(init.at("states"), domain_size_of(cfg.model), "initial");
    } else {
      place.predators = get_or<Count>(init, "predators", place.predators, "initial");
      place.prey = get_or<Count>(init, "prey", place.prey, "initial");
      if (place.predators < 0 || place.prey < 0) throw FormatError("initial counts must be non-negative");
      cfg.sim.initial = place;
    }
  }
  cfg.multiplicity = get_or<Count>(j, "multiplicity", cfg.multiplicity, where);
  cfg.window = get_or(j, "window", cfg.window, where);
  cfg.lookback = get_or(j, "lookback", cfg.lookback, where);
  cfg.evasion_threshold = get_or(j, "evasion_threshold", cfg.evasion_threshold, where);
  try {
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  if (cfg.multiplicity < 0) throw FormatError("multiplicity must be non-negative");
  if (cfg.window < 1) throw FormatError("window must be at least 1");
  if (cfg.lookback < 0) throw FormatError("lookback must be non-negative");
  if (!(cfg.evasion_threshold >= 0.0 && cfg.evasion_threshold <= 1.0)) {
    throw FormatError("evasion_threshold must lie in [0, 1]");
  }
  return cfg;
}

std::string format_config(const RunConfig& cfg) {
  json j{{"format", "abmap-config"},
         {"version", kFormatVersion},
         {"grid_size", cfg.model.grid_size},
         {"rates", rates_to_json(cfg.model.rates)},
         {"seed", cfg.sim.seed},
         {"timesteps", cfg.sim.timesteps},
         {"observe_prob", cfg.sim.observe_prob},
         {"multiplicity", cfg.multiplicity},
         {"window", cfg.window},
         {"lookback", cfg.lookback},
         {"evasion_threshold", cfg.evasion_threshold}};
  if (const auto* fixed = std::get_if<StateMultiset>(&cfg.sim.initial)) {
    j["initial"] = json{{"states", counts_to_json(*fixed)}};
  } else {
    const auto& place = std::get<UniformPlacement>(cfg.sim.initial);
    j["initial"] = json{{"predators", place.predators}, {"prey", place.prey}};
  }
  return dump(j);
}

Boundary parse_boundary(const std::string& text) {
  const char* where = "boundary";
  json j = parse_json(text);
  expect_format(j, "abmap-boundary");
  reject_unknown(j, {"format", "version", "domain_size", "grid_size", "rates", "initial", "timesteps", "observe_prob"},
                 where);
  Boundary b;
  b.model.grid_size = get<int>(j, "grid_size", where);
  if (j.contains("rates")) b.model.rates = rates_from_json(j.at("rates"));
  validate_model(b.model);
  check_domain(j, domain_size_of(b.model), where);
  b.initial = counts_from_json<StateIndex>(get<json>(j, "initial", where), domain_size_of(b.model), where);
  b.timesteps = get<int>(j, "timesteps", where);
  b.observe_prob = get_or(j, "observe_prob", b.observe_prob, where);
  if (b.timesteps < 0) throw FormatError("timesteps must be non-negative");
  if (!(b.observe_prob > 0.0 && b.observe_prob <= 1.0)) throw FormatError("observe_prob must lie in (0, 1]");
  return b;
}

std::string format_boundary(const Boundary& b) {
  json j{{"format", "abmap-boundary"},
         {"version", kFormatVersion},
         {"domain_size", domain_size_of(b.model)},
         {"grid_size", b.model.grid_size},
         {"rates", rates_to_json(b.model.rates)},
         {"initial", counts_to_json(b.initial)},
         {"timesteps", b.timesteps},
         {"observe_prob", b.observe_prob}};
  return dump(j);
}

Trajectory parse_trajectory(const std::string& text, std::size_t domain_size) {
  const char* where = "trajectory";
  json j = parse_json(text);
  expect_format(j, "abmap-trajectory");
  reject_unknown(j, {"format", "version", "domain_size", "grid_size", "legend", "initial", "steps"}, where);
  check_domain(j, domain_size, where);
  if (j.contains("grid_size")) {
    const auto n = get<std::size_t>(j, "grid_size", where);
    if (2 * n * n != domain_size) throw FormatError("trajectory: grid_size does not match domain_size");
  }
  Trajectory traj;
  traj.initial = counts_from_json<StateIndex>(get<json>(j, "initial", where), domain_size, where);
  traj.steps = steps_from_json(get<json>(j, "steps", where), where);
  return traj;
}

std::string format_trajectory(const Trajectory& traj, const predprey::Config& model) {
  json j{{"format", "abmap-trajectory"},
         {"version", kFormatVersion},
         {"domain_size", domain_size_of(model)},
         {"grid_size", model.grid_size},
         {"legend", "state = species*N*N + row*N + col, species 0 predator, 1 prey"},
         {"initial", counts_to_json(traj.initial)},
         {"steps", steps_to_json(traj.steps)}};
  return dump(j);
}

std::vector<Observation> parse_observations(const std::string& text, std::size_t domain_size) {
  const char* where = "observations";
  json j = parse_json(text);
  expect_format(j, "abmap-observations");
  reject_unknown(j, {"format", "version", "domain_size", "observations"}, where);
  check_domain(j, domain_size, where);
  const json& arr = get<json>(j, "observations", where);
  if (!arr.is_array()) throw FormatError("observations must be a list");
  std::vector<Observation> out;
  for (const auto& o : arr) out.push_back(observation_from_json(o, domain_size));
  return out;
}

std::string format_observations(const std::vector<Observation>& obs, std::size_t domain_size) {
  json arr = json::array();
  for (const auto& o : obs) arr.push_back(observation_to_json(o));
  json j{{"format", "abmap-observations"},
         {"version", kFormatVersion},
         {"domain_size", domain_size},
         {"observations", arr}};
  return dump(j);
}

AssimilationState parse_stream_state(const std::string& text, std::size_t domain_size) {
  const char* where = "stream state";
  json j = parse_json(text);
  expect_format(j, "abmap-stream-state");
  reject_unknown(j,
                 {"format", "version", "domain_size", "initial", "multiplicity", "window", "lookback",
                  "horizon_processed", "rollback_count", "committed", "observations"},
                 where);
  check_domain(j, domain_size, where);
  AssimilationState s;
  s.initial = counts_from_json<StateIndex>(get<json>(j, "initial", where), domain_size, where);
  s.multiplicity = get<Count>(j, "multiplicity", where);
  s.window = get<int>(j, "window", where);
  s.lookback = get<int>(j, "lookback", where);
  s.horizon_processed = get<int>(j, "horizon_processed", where);
  s.rollback_count = get<std::size_t>(j, "rollback_count", where);
  s.committed = steps_from_json(get<json>(j, "committed", where), where);
  const json& arr = get<json>(j, "observations", where);
  if (!arr.is_array()) throw FormatError("observations must be a list");
  for (const auto& o : arr) s.observations.push_back(observation_from_json(o, domain_size));
  if (s.horizon_processed < 0 || s.committed.size() != static_cast<std::size_t>(s.horizon_processed)) {
    throw FormatError("stream state: committed steps do not match processed horizon");
  }
  return s;
}

std::string format_stream_state(const AssimilationState& state, std::size_t domain_size) {
  json obs = json::array();
  for (const auto& o : state.observations) obs.push_back(observation_to_json(o));
  json j{{"format", "abmap-stream-state"},
         {"version", kFormatVersion},
         {"domain_size", domain_size},
         {"initial", counts_to_json(state.initial)},
         {"multiplicity", state.multiplicity},
         {"window", state.window},
         {"lookback", state.lookback},
         {"horizon_processed", state.horizon_processed},
         {"rollback_count", state.rollback_count},
         {"committed", steps_to_json(state.committed)},
         {"observations", obs}};
  return dump(j);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw FormatError("error writing " + path.string());
}

}  // namespace abmap::io
