#include "abmap/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "abmap/assimilate.hpp"
#include "abmap/encode.hpp"
#include "abmap/file_formats.hpp"
#include "abmap/lp_format.hpp"
#include "abmap/metrics.hpp"
#include "abmap/predprey.hpp"
#include "abmap/simulate.hpp"

namespace abmap::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::size_t domain_size(const predprey::Config& m) {
  return 2 * static_cast<std::size_t>(m.grid_size) * static_cast<std::size_t>(m.grid_size);
}

MilpLimits limits_from(std::size_t node_limit) {
  MilpLimits limits;
  limits.node_limit = node_limit;
  if (node_limit == 0) {
    if (const char* env = std::getenv(kNodeLimitEnv); env && *env) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        limits.node_limit = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw InputError(std::string(kNodeLimitEnv) + " must be a non-negative integer");
      }
    }
  }
  return limits;
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  return io::read_file(path);
}

int horizon_of(const io::Boundary& b, const std::vector<Observation>& obs) {
  int last = 0;
  for (const auto& o : obs) last = std::max(last, o.timestep);
  if (last > b.timesteps) {
    throw InputError("observation at t=" + std::to_string(last) + " beyond boundary horizon " +
                     std::to_string(b.timesteps));
  }
  return b.timesteps;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Observations with timesteps in (from, to], shifted by -shift.
std::vector<Observation> slice(const std::vector<Observation>& obs, int from, int to, int shift) {
  std::vector<Observation> out;
  for (auto o : obs) {
    if (o.timestep > from && o.timestep <= to) {
      o.timestep -= shift;
      out.push_back(std::move(o));
    }
  }
  return out;
}

void write_lp(const IntegerProgram& program, const std::string& out_path, std::ostream& out) {
  const std::string text = export_lp_text(program);
  if (out_path == "-") {
    out << text;
  } else {
    io::write_file(out_path, text);
  }
}

struct Common {
  std::size_t node_limit = 0;
};

int cmd_simulate(const std::string& config_path, const std::string& traj_path, const std::string& obs_path,
                 const std::string& boundary_path, std::ostream& err) {
  const auto start = Clock::now();
  io::RunConfig cfg = io::parse_config(io::read_file(config_path));
  const BehaviourModel model = predprey::build_model(cfg.model);
  if (auto* place = std::get_if<UniformPlacement>(&cfg.sim.initial)) place->grid_size = cfg.model.grid_size;
  Trajectory traj;
  try {
    traj = simulate(model, cfg.sim);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const auto obs = observe(traj, model, cfg.sim.observe_prob, derive_seed(cfg.sim.seed, 1));
  io::Boundary boundary{cfg.model, traj.initial, cfg.sim.timesteps, cfg.sim.observe_prob};
  if (boundary.observe_prob <= 0.0) boundary.observe_prob = 1.0;
  io::write_file(traj_path, io::format_trajectory(traj, cfg.model));
  io::write_file(obs_path, io::format_observations(obs, domain_size(cfg.model)));
  io::write_file(boundary_path, io::format_boundary(boundary));
  err << "simulate: " << traj.initial.total() << " agents, " << traj.horizon() << " steps, " << obs.size()
      << " observations in " << seconds_since(start) << " s\n";
  return kSuccess;
}

int cmd_assimilate(const std::string& obs_path, const std::string& boundary_path, int window,
                   Count multiplicity, const std::string& out_path, const std::string& solver,
                   const Common& common, std::istream& in, std::ostream& out, std::ostream& err) {
  const io::Boundary boundary = io::parse_boundary(io::read_file(boundary_path));
  const auto obs = io::parse_observations(read_input(obs_path, in), domain_size(boundary.model));
  const int horizon = horizon_of(boundary, obs);
  if (window < 1) throw InputError("window must be at least 1");
  const BehaviourModel model = predprey::build_model(boundary.model);
  if (solver == "lp-export") {
    // Later windows start from earlier solutions, so only one window can be handed off.
    if (window < horizon) throw InputError("--solver lp-export needs a single window (window >= horizon)");
    const Count m = multiplicity > 0 ? multiplicity : default_multiplicity(model, boundary.initial, horizon);
    write_lp(encode_offline(model, boundary.initial, obs, horizon, m).program, out_path, out);
    return kSuccess;
  }
  const MilpLimits limits = limits_from(common.node_limit);

  Trajectory result{boundary.initial, {}};
  StateMultiset start = boundary.initial;
  for (int t0 = 0; t0 < horizon || (t0 == 0 && horizon == 0); t0 += window) {
    const int steps = std::min(window, horizon - t0);
    auto local = slice(obs, t0 == 0 ? -1 : t0, t0 + steps, t0);
    const Count m = multiplicity > 0 ? multiplicity : default_multiplicity(model, start, steps);
    const auto begin = Clock::now();
    SolveStats stats;
    Trajectory part;
    try {
      part = map_offline(model, start, local, steps, m, limits, &stats);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("window (" + std::to_string(t0) + ", " + std::to_string(t0 + steps) + "]: " + e.what());
    }
    err << "assimilate: window " << t0 << ".." << t0 + steps << " vars=" << stats.variables
        << " rows=" << stats.constraints << " nodes=" << stats.nodes << " time=" << seconds_since(begin) << " s\n";
    start = states_at(part, part.horizon(), model);
    result.steps.insert(result.steps.end(), part.steps.begin(), part.steps.end());
    if (horizon == 0) break;
  }
  io::write_file(out_path, io::format_trajectory(result, boundary.model));
  return kSuccess;
}

struct StreamOptions {
  int window = 1;
  int lookback = 0;
  Count multiplicity = 0;
  double evasion_threshold = 0.0;
  std::string partial_path = "partial.json";
  std::string completed_path = "completed.json";
  std::string state_path;
  std::string resume_path;
  std::string stats_path;
  int max_windows = 0;
};

int cmd_stream(const std::string& obs_path, const std::string& boundary_path, const StreamOptions& opt,
               const Common& common, std::istream& in, std::ostream& err) {
  const io::Boundary boundary = io::parse_boundary(io::read_file(boundary_path));
  const std::size_t dsize = domain_size(boundary.model);
  const auto obs = io::parse_observations(read_input(obs_path, in), dsize);
  const int horizon = horizon_of(boundary, obs);
  auto model = std::make_shared<const BehaviourModel>(predprey::build_model(boundary.model));
  const MilpLimits limits = limits_from(common.node_limit);

  AssimilationState state;
  if (!opt.resume_path.empty()) {
    state = io::parse_stream_state(io::read_file(opt.resume_path), dsize);
    if (!(state.initial == boundary.initial)) throw InputError("resumed state has a different initial state");
  } else {
    if (opt.window < 1) throw InputError("window must be at least 1");
    if (opt.lookback < 0) throw InputError("lookback must be non-negative");
    state.initial = boundary.initial;
    state.window = opt.window;
    state.lookback = opt.lookback;
    state.multiplicity = opt.multiplicity > 0 ? opt.multiplicity : default_multiplicity(*model, state.initial, horizon);
    auto at_zero = slice(obs, -1, 0, 0);
    if (!satisfies(Trajectory{state.initial, {}}, at_zero, *model).empty()) {
      throw InfeasibleError("observations at t=0 contradict the initial state");
    }
    state.observations = at_zero;
  }
  OnlineAssimilator online(model, std::move(state), limits);

  std::ostringstream stats;
  stats << "window_end,rollbacks,solves,nodes,variables,constraints\n";
  int windows = 0;
  while (online.state().horizon_processed < horizon) {
    if (opt.max_windows > 0 && windows == opt.max_windows) break;
    const int h = online.state().horizon_processed;
    const int steps = std::min(online.state().window, horizon - h);
    const auto begin = Clock::now();
    StepReport rep = online.step(slice(obs, h, h + steps, 0), steps);
    if (opt.evasion_threshold > 0.0) {
      for (const auto& d : online.commit_departure(opt.evasion_threshold, boundary.observe_prob)) {
        err << "stream: " << d << '\n';
      }
    }
    ++windows;
    stats << rep.horizon << ',' << rep.rollbacks << ',' << rep.stats.solves << ',' << rep.stats.nodes << ','
          << rep.stats.variables << ',' << rep.stats.constraints << '\n';
    err << "stream: window ending t=" << rep.horizon << " rollbacks=" << rep.rollbacks
        << " time=" << seconds_since(begin) << " s\n";
    if (!opt.state_path.empty()) io::write_file(opt.state_path, io::format_stream_state(online.state(), dsize));
  }
  if (!opt.state_path.empty()) io::write_file(opt.state_path, io::format_stream_state(online.state(), dsize));
  io::write_file(opt.partial_path, io::format_trajectory(online.partial(), boundary.model));
  if (online.state().horizon_processed == horizon) {
    const auto begin = Clock::now();
    StepReport rep;
    Trajectory full = online.complete(&rep);
    stats << "complete," << rep.rollbacks << ',' << rep.stats.solves << ',' << rep.stats.nodes << ','
          << rep.stats.variables << ',' << rep.stats.constraints << '\n';
    err << "stream: completion time=" << seconds_since(begin) << " s, total rollbacks "
        << online.state().rollback_count << '\n';
    io::write_file(opt.completed_path, io::format_trajectory(full, boundary.model));
  }
  if (!opt.stats_path.empty()) io::write_file(opt.stats_path, stats.str());
  return kSuccess;
}

int cmd_export_lp(const std::string& obs_path, const std::string& boundary_path, Count multiplicity,
                  const std::string& out_path, std::istream& in, std::ostream& out) {
  const io::Boundary boundary = io::parse_boundary(io::read_file(boundary_path));
  const auto obs = io::parse_observations(read_input(obs_path, in), domain_size(boundary.model));
  const int horizon = horizon_of(boundary, obs);
  const BehaviourModel model = predprey::build_model(boundary.model);
  const Count m = multiplicity > 0 ? multiplicity : default_multiplicity(model, boundary.initial, horizon);
  write_lp(encode_offline(model, boundary.initial, obs, horizon, m).program, out_path, out);
  return kSuccess;
}

int cmd_metrics(const std::string& real_path, const std::string& est_path, const std::string& obs_path,
                const std::string& boundary_path, std::size_t samples, std::uint64_t seed,
                const std::string& out_path, std::istream& in, std::ostream& out) {
  const io::Boundary boundary = io::parse_boundary(io::read_file(boundary_path));
  const std::size_t dsize = domain_size(boundary.model);
  const BehaviourModel model = predprey::build_model(boundary.model);
  const Trajectory real = io::parse_trajectory(io::read_file(real_path), dsize);
  const Trajectory est = io::parse_trajectory(io::read_file(est_path), dsize);
  const auto obs = io::parse_observations(read_input(obs_path, in), dsize);
  if (samples < 1) throw InputError("samples must be at least 1");
  for (const Trajectory* t : {&real, &est}) {
    auto v = check_feasible(*t, model, Feasibility::kComplete);
    if (!v.empty()) throw InputError("trajectory is not feasible: " + describe(v.front()));
  }
  if (real.horizon() != est.horizon()) throw InputError("trajectories have different horizons");
  const auto rows = distance_curve(real, est, obs, model, samples, seed);
  std::ostringstream os;
  write_metrics_csv(os, rows, log_ratio(est, real, model));
  if (out_path == "-") {
    out << os.str();
  } else {
    io::write_file(out_path, os.str());
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"MAP trajectory estimation for agent-based models", "abmap"};
  app.require_subcommand(1);
  Common common;

  std::string config_path, traj_path = "trajectory.json", obs_out = "observations.json",
                           boundary_out = "boundary.json";
  auto* sim = app.add_subcommand("simulate", "Run a seeded predator-prey simulation and observe it");
  sim->add_option("config", config_path, "Config file (abmap-config)")->required();
  sim->add_option("--trajectory", traj_path, "Output trajectory file")->capture_default_str();
  sim->add_option("--observations", obs_out, "Output observations file")->capture_default_str();
  sim->add_option("--boundary", boundary_out, "Output boundary file")->capture_default_str();

  std::string obs_path, boundary_path, out_path = "map.json";
  int window = 7;
  Count multiplicity = 0;
  auto* assim = app.add_subcommand("assimilate", "Offline MAP trajectory, one window at a time");
  assim->add_option("observations", obs_path, "Observations file, - for stdin")->required();
  assim->add_option("boundary", boundary_path, "Boundary file")->required();
  assim->add_option("-w,--window", window, "Window length in timesteps")->capture_default_str();
  assim->add_option("-m,--multiplicity", multiplicity, "Big-M multiplicity, 0 = agents at window start")
      ->capture_default_str();
  assim->add_option("-o,--out", out_path, "Output trajectory file (LP file with lp-export, - for stdout)")
      ->capture_default_str();
  std::string solver = "internal";
  assim->add_option("--solver", solver, "internal solves here; lp-export writes the program instead")
      ->check(CLI::IsMember({"internal", "lp-export"}))
      ->capture_default_str();
  assim->add_option("--node-limit", common.node_limit, "Branch-and-bound node budget, 0 = unlimited or $" +
                                                           std::string(kNodeLimitEnv));

  StreamOptions sopt;
  auto* stream = app.add_subcommand("stream", "Online assimilation with commitment and rollback");
  stream->add_option("observations", obs_path, "Observations file, - for stdin")->required();
  stream->add_option("boundary", boundary_path, "Boundary file")->required();
  stream->add_option("-w,--window", sopt.window, "Window length in timesteps")->capture_default_str();
  stream->add_option("--lookback", sopt.lookback, "Steps with variables besides hanging ones, 0 = all")
      ->capture_default_str();
  stream->add_option("-m,--multiplicity", sopt.multiplicity, "Big-M multiplicity, 0 = initial agents")
      ->capture_default_str();
  stream->add_option("--evasion-threshold", sopt.evasion_threshold, "Commit departures below this, 0 = never")
      ->capture_default_str();
  stream->add_option("--partial", sopt.partial_path, "Output committed partial trajectory")->capture_default_str();
  stream->add_option("-o,--out", sopt.completed_path, "Output completed trajectory")->capture_default_str();
  stream->add_option("--state", sopt.state_path, "Persist assimilation state here after every window");
  stream->add_option("--resume", sopt.resume_path, "Resume from a persisted assimilation state");
  stream->add_option("--stats", sopt.stats_path, "Per-window statistics CSV");
  stream->add_option("--max-windows", sopt.max_windows, "Stop after this many windows, 0 = all")
      ->capture_default_str();
  stream->add_option("--node-limit", common.node_limit, "Branch-and-bound node budget per solve");

  std::string lp_out = "-";
  auto* lp = app.add_subcommand("export-lp", "Write the offline integer program in LP format");
  lp->add_option("observations", obs_path, "Observations file, - for stdin")->required();
  lp->add_option("boundary", boundary_path, "Boundary file")->required();
  lp->add_option("-m,--multiplicity", multiplicity, "Big-M multiplicity, 0 = default")->capture_default_str();
  lp->add_option("-o,--out", lp_out, "Output LP file, - for stdout")->capture_default_str();

  std::string real_path, est_path, csv_out = "-";
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  auto* met = app.add_subcommand("metrics", "Distance curve and log ratio of an estimate against the truth");
  met->add_option("real", real_path, "Real trajectory file")->required();
  met->add_option("estimate", est_path, "Estimated trajectory file")->required();
  met->add_option("observations", obs_path, "Observations file")->required();
  met->add_option("--boundary", boundary_path, "Boundary file")->required();
  met->add_option("--samples", samples, "Monte Carlo samples for the random baseline")->capture_default_str();
  met->add_option("--seed", seed, "Seed for the random baseline")->capture_default_str();
  met->add_option("-o,--out", csv_out, "Output CSV, - for stdout")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*sim) return cmd_simulate(config_path, traj_path, obs_out, boundary_out, err);
    if (*assim) return cmd_assimilate(obs_path, boundary_path, window, multiplicity, out_path, solver, common, in, out, err);
    if (*stream) return cmd_stream(obs_path, boundary_path, sopt, common, in, err);
    if (*lp) return cmd_export_lp(obs_path, boundary_path, multiplicity, lp_out, in, out);
    if (*met) return cmd_metrics(real_path, est_path, obs_path, boundary_path, samples, seed, csv_out, in, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kBudgetExceeded;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::out_of_range& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::runtime_error& e) {
    // Numerical trouble the solver could not recover from.
    err << "solver failure: " << e.what() << '\n';
    return kBudgetExceeded;
  }
  return kInputError;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace abmap::cli
