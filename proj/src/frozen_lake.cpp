#include "rmdp/frozen_lake.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmdp {

namespace {

// Row/column deltas for up, down, left, right in this order.
constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

// The two directions perpendicular to an action share its axis complement:
// up/down slip sideways, left/right slip vertically.
constexpr int kPerp[4][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};

void check_layout_shape(long n, const std::vector<char>& holes) {
    if (n < 2) throw InvalidLayout("the grid needs at least 2x2 cells");
    if (static_cast<long>(holes.size()) != n * n)
        throw InvalidLayout("hole bitmap has " + std::to_string(holes.size()) +
                            " cells, expected " + std::to_string(n * n));
    if (holes.front()) throw InvalidLayout("the start cell cannot be a hole");
    if (holes.back()) throw InvalidLayout("the goal cell cannot be a hole");
}

}  // namespace

std::vector<char> holes_from_map(const std::string& drawing) {
    std::vector<std::string> rows;
    std::string current;
    for (char ch : drawing) {
        if (ch == ';' || ch == '\n') {
            if (!current.empty()) rows.push_back(current);
            current.clear();
        } else if (ch != ' ' && ch != '\t' && ch != '\r') {
            current.push_back(ch);
        }
    }
    if (!current.empty()) rows.push_back(current);

    const long n = static_cast<long>(rows.size());
    if (n < 2) throw InvalidLayout("the grid needs at least 2 rows");
    std::vector<char> holes;
    holes.reserve(static_cast<size_t>(n) * n);
    for (long r = 0; r < n; ++r) {
        if (static_cast<long>(rows[r].size()) != n)
            throw InvalidLayout("row " + std::to_string(r) + " has " +
                                std::to_string(rows[r].size()) + " cells, expected " +
                                std::to_string(n) + " for a square grid");
        for (long c = 0; c < n; ++c) {
            const char ch = rows[r][c];
            const long cell = r * n + c;
            switch (ch) {
            case 'H': holes.push_back(1); break;
            case 'F': holes.push_back(0); break;
            case 'S':
                if (cell != 0)
                    throw InvalidLayout("'S' is only valid in the top-left cell");
                holes.push_back(0);
                break;
            case 'G':
                if (cell != n * n - 1)
                    throw InvalidLayout("'G' is only valid in the bottom-right cell");
                holes.push_back(0);
                break;
            default:
                throw InvalidLayout(std::string("unknown cell character '") + ch + "'");
            }
        }
    }
    check_layout_shape(n, holes);
    return holes;
}

std::vector<char> frozen_lake_random_holes(long n, std::uint64_t seed, prec_t density) {
    if (n < 2) throw InvalidLayout("the grid needs at least 2x2 cells");
    if (!(density >= 0.0 && density <= 1.0))
        throw InvalidLayout("hole density must lie in [0, 1]");
    Xorshift64 rng(seed);
    std::vector<char> holes(static_cast<size_t>(n) * n, 0);
    // Start and goal stay free but still consume a draw, so layouts of
    // different densities stay aligned for the same seed.
    for (long cell = 0; cell < n * n; ++cell) {
        const bool hole = rng.next_unit() < density;
        if (cell != 0 && cell != n * n - 1) holes[cell] = hole ? 1 : 0;
    }
    return holes;
}

Mdp frozen_lake_mdp(long n, prec_t slip, const std::vector<char>& holes,
                    FrozenLakeRewards rewards, prec_t discount) {
    check_layout_shape(n, holes);
    if (!(slip >= 0.0 && slip <= 1.0)) throw ModelError("slip must lie in [0, 1]");
    if (!(discount >= 0.0 && discount < 1.0)) throw ModelError("discount must lie in [0, 1)");
    if (!std::isfinite(rewards.goal) || !std::isfinite(rewards.step) ||
        !std::isfinite(rewards.hole))
        throw ModelError("rewards must be finite");

    const long count = n * n;
    const long goal = count - 1;

    Mdp mdp;
    mdp.state_names.reserve(static_cast<size_t>(count));
    for (long cell = 0; cell < count; ++cell)
        mdp.state_names.push_back("c" + std::to_string(cell));
    mdp.action_names = {"up", "down", "left", "right"};
    mdp.enabled.assign(static_cast<size_t>(count), indvec{0, 1, 2, 3});
    mdp.transitions.assign(static_cast<size_t>(count), std::vector<Transition>(4));
    mdp.rewards.assign(static_cast<size_t>(count), numvec(4, 0.0));
    mdp.initial_state = 0;
    mdp.discount = discount;

    for (long cell = 0; cell < count; ++cell) {
        const bool absorbing = cell == goal || holes[cell];
        for (long a = 0; a < 4; ++a) {
            if (absorbing) {
                mdp.transitions[cell][a] = Transition({cell}, {1.0});
                continue;
            }
            const long r = cell / n, c = cell % n;
            // Intended direction plus the two perpendicular slips; bumping
            // the wall keeps the agent in place and the mass merges.
            const long dirs[3] = {a, kPerp[a][0], kPerp[a][1]};
            const prec_t mass[3] = {1.0 - slip, slip / 2.0, slip / 2.0};
            indvec succs;
            numvec probs;
            for (int i = 0; i < 3; ++i) {
                if (mass[i] <= 0.0) continue;
                const long tr = r + kDr[dirs[i]], tc = c + kDc[dirs[i]];
                const long target =
                    (tr < 0 || tr >= n || tc < 0 || tc >= n) ? cell : tr * n + tc;
                const auto at = std::lower_bound(succs.begin(), succs.end(), target);
                if (at != succs.end() && *at == target) {
                    probs[at - succs.begin()] += mass[i];
                } else {
                    probs.insert(probs.begin() + (at - succs.begin()), mass[i]);
                    succs.insert(at, target);
                }
            }
            Transition tran(std::move(succs), std::move(probs));
            prec_t reward = rewards.step;
            for (size_t i = 0; i < tran.size(); ++i) {
                if (tran.succs[i] == goal)
                    reward += rewards.goal * tran.probs[i];
                else if (holes[tran.succs[i]])
                    reward += rewards.hole * tran.probs[i];
            }
            mdp.rewards[cell][a] = reward;
            mdp.transitions[cell][a] = std::move(tran);
        }
    }

    validate_mdp(mdp);
    return mdp;
}

Mdp frozen_lake_mdp_seeded(long n, prec_t slip, std::uint64_t seed,
                           FrozenLakeRewards rewards, prec_t discount) {
    return frozen_lake_mdp(n, slip, frozen_lake_random_holes(n, seed), rewards, discount);
}

}  // namespace rmdp
