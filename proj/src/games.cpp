#include "rmdp/games.hpp"

#include "rmdp/robust_eval.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

Rmdp game_to_rmdp(const DiscountedGame& game) {
    validate_game(game);
    const long n = game.num_states();

    Rmdp r;
    r.state_names = game.state_names;
    r.action_names = game.action_names;
    r.rewards = game.rewards;
    r.initial_state = game.initial_state;
    r.discount = game.discount;
    r.enabled.resize(n);
    r.uncertainty.resize(n);
    for (long s = 0; s < n; ++s) {
        r.uncertainty[s].resize(game.num_actions());
        for (long a = 0; a < game.num_actions(); ++a) {
            r.enabled[s].push_back(a);
            r.uncertainty[s][a] = simplex_over_support(game.successors[s][a], n);
        }
    }
    validate_rmdp(r);
    return r;
}

prec_t game_value(const DiscountedGame& game, const SolverConfig& config) {
    const Rmdp r = game_to_rmdp(game);
    const RpiResult res = robust_policy_iteration(r, config);
    return res.value.values[r.initial_state];
}

}  // namespace rmdp
