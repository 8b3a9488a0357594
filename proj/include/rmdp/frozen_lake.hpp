#pragma once

// Grid-world benchmark generator: an n-by-n frozen lake crossed from the
// top-left cell to the bottom-right goal. Moves slip sideways with the given
// probability, walls bounce back, and holes and the goal absorb.

#include <cstdint>
#include <string>
#include <vector>

#include "rmdp/model.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

struct FrozenLakeRewards {
    prec_t goal = 100.0;
    prec_t step = -1.0;
    prec_t hole = -10.0;
};

/// Hole bitmap from a drawing with one character per cell: rows separated by
/// ';' or newline, 'H' marks a hole, 'S', 'F' and 'G' mark free cells (start
/// and goal are positional: top-left and bottom-right). Throws InvalidLayout
/// on ragged rows, bad characters, or misplaced start/goal markers.
std::vector<char> holes_from_map(const std::string& drawing);

/// Random hole bitmap: every cell except start and goal becomes a hole
/// independently with the given density. Reproducible from the seed.
std::vector<char> frozen_lake_random_holes(long n, std::uint64_t seed, prec_t density = 0.2);

/// The lake as an MDP. States are cells in row-major order; actions are
/// up, down, left, right (indices 0 to 3). A move goes to the intended
/// neighbor with probability 1 - slip and to each perpendicular neighbor
/// with slip/2; bumping a wall stays in place and the mass merges. Holes and
/// the goal are absorbing with zero reward; every other cell pays
///   step + goal_reward * P(goal | s,a) + hole_reward * P(hole | s,a).
/// The start is the top-left cell, the goal the bottom-right one. Throws
/// InvalidLayout when the bitmap has the wrong length or start/goal is a
/// hole, and ModelError for out-of-range slip or discount.
Mdp frozen_lake_mdp(long n, prec_t slip, const std::vector<char>& holes,
                    FrozenLakeRewards rewards = {}, prec_t discount = 0.9);

/// Convenience wrapper generating the hole bitmap from a seed.
Mdp frozen_lake_mdp_seeded(long n, prec_t slip, std::uint64_t seed,
                           FrozenLakeRewards rewards = {}, prec_t discount = 0.9);

}  // namespace rmdp
