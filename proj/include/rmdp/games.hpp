#pragma once

// Two-player discounted-sum games on graphs, solved by reduction to a
// robust MDP: the antagonist's choice of successor becomes an adversarial
// distribution ranging over the simplex spanned by the allowed successors.
// Parity or other objectives are not translated here; only discounted sums.

#include "rmdp/model.hpp"
#include "rmdp/solvers.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

/// Reduction to a robust MDP over the same states, actions, rewards and
/// discount. The uncertainty set of (s,a) is the simplex over the game's
/// successor set, whose vertices are exactly the deterministic successor
/// choices, so the worst-case optimal value at the initial state equals the
/// game's max-min value.
Rmdp game_to_rmdp(const DiscountedGame& game);

/// Max-min value of the game at its initial state, via robust policy
/// iteration on the reduction.
prec_t game_value(const DiscountedGame& game, const SolverConfig& config);

}  // namespace rmdp
