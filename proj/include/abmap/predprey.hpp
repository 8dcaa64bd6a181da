#pragma once

// Spatial predator-prey model on an N x N torus.
//
// State index = species * N^2 + row * N + col with predators first. Each prey
// may die, reproduce into a neighbour, move to a predator-free neighbour (or
// be eaten by the predator there), or stay put (or be eaten by the first
// adjacent predator in up < down < left < right order). A prey that is eaten
// becomes a predator on its own square. Predators die, move or stay
// unconditionally.

#include <array>

#include "abmap/core_model.hpp"
#include "abmap/random.hpp"

namespace abmap::predprey {

enum class Species : std::uint8_t { kPredator = 0, kPrey = 1 };

enum class Direction : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr std::array<Direction, 4> kDirections = {Direction::kUp, Direction::kDown,
                                                         Direction::kLeft, Direction::kRight};

struct Rates {
  double prey_die = 0.03;
  double prey_reproduce = 0.06;
  double prey_move = 0.728;  // move, or be eaten by the predator blocking the move
  double prey_stay = 0.182;  // stay put, or be eaten by an adjacent predator
  double predator_die = 0.05;
  double predator_move = 0.76;
  double predator_stay = 0.19;

  /// Throws std::invalid_argument unless every rate is in [0, 1] and each
  /// species' rates sum to 1 within 1e-12.
  void validate() const;
  friend bool operator==(const Rates&, const Rates&) = default;
};

struct Config {
  int grid_size = 32;
  Rates rates;

  void validate() const;
};

struct CellState {
  Species species = Species::kPrey;
  int row = 0;
  int col = 0;
  friend bool operator==(const CellState&, const CellState&) = default;
};

StateIndex encode_state(const CellState& cell, int grid_size);
CellState decode_state(StateIndex state, int grid_size);
CellState neighbour(const CellState& cell, Direction d, int grid_size);

/// Builds the behaviour model. Event ids follow construction order: all
/// predator states, then all prey states, each in state-index order. Zero
/// rates produce no events. Grids smaller than 3 are rejected because a cell
/// would then share neighbours with itself in two directions.
BehaviourModel build_model(const Config& cfg);

/// Manhattan distance with periodic wraparound.
int torus_l1(const CellState& a, const CellState& b, int grid_size);

/// Places agents independently and uniformly over the grid.
StateMultiset place_uniform(int grid_size, Count predators, Count prey, Rng& rng);

}  // namespace abmap::predprey
