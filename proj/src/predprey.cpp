#include "abmap/predprey.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace abmap::predprey {

namespace {

constexpr double kRateSumTolerance = 1e-12;

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
    case Direction::kLeft: return "left";
    case Direction::kRight: return "right";
  }
  return "?";
}

int wrap(int v, int n) { return ((v % n) + n) % n; }

class EventSink {
 public:
  void emit(StateIndex actor, double p, StateMultiset consequence, std::vector<StateIndex> required,
            std::vector<StateIndex> forbidden, std::string label) {
    if (p <= 0.0) return;
    std::sort(required.begin(), required.end());
    std::sort(forbidden.begin(), forbidden.end());
    AgentEvent e;
    e.id = static_cast<EventId>(events_.size());
    e.actor = actor;
    e.required = std::move(required);
    e.forbidden = std::move(forbidden);
    e.consequence = std::move(consequence);
    e.probability = p;
    e.label = std::move(label);
    events_.push_back(std::move(e));
  }
  std::vector<AgentEvent> take() { return std::move(events_); }

 private:
  std::vector<AgentEvent> events_;
};

}  // namespace

void Rates::validate() const {
  const double all[] = {prey_die, prey_reproduce, prey_move, prey_stay,
                        predator_die, predator_move, predator_stay};
  for (double r : all) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rates must lie in [0, 1]");
  }
  const double prey = prey_die + prey_reproduce + prey_move + prey_stay;
  const double pred = predator_die + predator_move + predator_stay;
  if (std::abs(prey - 1.0) > kRateSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "prey rates sum to " << prey << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  if (std::abs(pred - 1.0) > kRateSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "predator rates sum to " << pred << ", expected 1";
    throw std::invalid_argument(os.str());
  }
}

void Config::validate() const {
  if (grid_size < 3) throw std::invalid_argument("grid size must be at least 3");
  if (static_cast<long long>(grid_size) * grid_size * 2 > (1LL << 30)) {
    throw std::invalid_argument("grid size too large");
  }
  rates.validate();
}

StateIndex encode_state(const CellState& cell, int n) {
  return static_cast<StateIndex>(static_cast<int>(cell.species) * n * n + cell.row * n + cell.col);
}

CellState decode_state(StateIndex state, int n) {
  const int cells = n * n;
  const int s = static_cast<int>(state);
  if (s >= 2 * cells) throw std::out_of_range("state index outside predator-prey domain");
  const int cell = s % cells;
  return {s < cells ? Species::kPredator : Species::kPrey, cell / n, cell % n};
}

CellState neighbour(const CellState& cell, Direction d, int n) {
  CellState out = cell;
  switch (d) {
    case Direction::kUp: out.row = wrap(cell.row - 1, n); break;
    case Direction::kDown: out.row = wrap(cell.row + 1, n); break;
    case Direction::kLeft: out.col = wrap(cell.col - 1, n); break;
    case Direction::kRight: out.col = wrap(cell.col + 1, n); break;
  }
  return out;
}

BehaviourModel build_model(const Config& cfg) {
  cfg.validate();
  const int n = cfg.grid_size;
  const Rates& r = cfg.rates;
  const std::size_t cells = static_cast<std::size_t>(n) * n;

  StateDomain domain;
  domain.size = 2 * cells;

  EventSink sink;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const CellState here{Species::kPredator, row, col};
      const StateIndex x = encode_state(here, n);
      const std::string at = "predator(" + std::to_string(row) + "," + std::to_string(col) + ")";
      sink.emit(x, r.predator_die, {}, {}, {}, at + " die");
      for (Direction d : kDirections) {
        const StateIndex to = encode_state(neighbour(here, d, n), n);
        sink.emit(x, r.predator_move / 4, {{to, 1}}, {}, {}, at + " move " + direction_name(d));
      }
      sink.emit(x, r.predator_stay, {{x, 1}}, {}, {}, at + " stay");
    }
  }
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const CellState here{Species::kPrey, row, col};
      const StateIndex x = encode_state(here, n);
      const StateIndex eaten_at = encode_state({Species::kPredator, row, col}, n);
      std::array<StateIndex, 4> prey_at{}, predator_at{};
      for (Direction d : kDirections) {
        const CellState nb = neighbour(here, d, n);
        prey_at[static_cast<int>(d)] = encode_state(nb, n);
        predator_at[static_cast<int>(d)] = encode_state({Species::kPredator, nb.row, nb.col}, n);
      }
      const std::string at = "prey(" + std::to_string(row) + "," + std::to_string(col) + ")";

      sink.emit(x, r.prey_die, {}, {}, {}, at + " die");
      for (Direction d : kDirections) {
        StateMultiset kids{{x, 1}};
        kids.add(prey_at[static_cast<int>(d)]);
        sink.emit(x, r.prey_reproduce / 4, kids, {}, {}, at + " reproduce " + direction_name(d));
      }
      for (Direction d : kDirections) {
        const int k = static_cast<int>(d);
        sink.emit(x, r.prey_move / 4, {{prey_at[k], 1}}, {}, {predator_at[k]},
                  at + " move " + direction_name(d));
      }
      for (Direction d : kDirections) {
        const int k = static_cast<int>(d);
        sink.emit(x, r.prey_move / 4, {{eaten_at, 1}}, {predator_at[k]}, {},
                  at + " eaten moving " + direction_name(d));
      }
      sink.emit(x, r.prey_stay, {{x, 1}}, {},
                std::vector<StateIndex>(predator_at.begin(), predator_at.end()), at + " stay");
      for (Direction d : kDirections) {
        const int k = static_cast<int>(d);
        sink.emit(x, r.prey_stay, {{eaten_at, 1}}, {predator_at[k]},
                  std::vector<StateIndex>(predator_at.begin(), predator_at.begin() + k),
                  at + " eaten staying " + direction_name(d));
      }
    }
  }
  return BehaviourModel(std::move(domain), sink.take());
}

int torus_l1(const CellState& a, const CellState& b, int n) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  return std::min(dr, n - dr) + std::min(dc, n - dc);
}

StateMultiset place_uniform(int n, Count predators, Count prey, Rng& rng) {
  if (n < 1) throw std::invalid_argument("grid size must be positive");
  if (predators < 0 || prey < 0) throw std::invalid_argument("agent counts must be non-negative");
  const auto cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  StateMultiset out;
  for (Count i = 0; i < predators; ++i) out.add(static_cast<StateIndex>(rng.uniform_index(cells)));
  for (Count i = 0; i < prey; ++i) out.add(static_cast<StateIndex>(cells + rng.uniform_index(cells)));
  return out;
}

}  // namespace abmap::predprey
