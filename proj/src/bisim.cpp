#include "rmdp/bisim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmdp/parallel.hpp"
#include "rmdp/robust_eval.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

namespace {

/// The shared enabled action set, after checking that all states agree.
/// The product construction pairs every two states, so any asymmetry in the
/// available actions breaks the pairing.
const indvec& shared_actions(const Mdp& m) {
    for (long s = 1; s < m.num_states(); ++s)
        if (m.enabled[s] != m.enabled[0])
            throw ActionMismatch("states " + m.state_names[0] + " and " + m.state_names[s] +
                                 " enable different action sets");
    return m.enabled[0];
}

}  // namespace

BisimWeights default_bisim_weights(prec_t discount) {
    return {1.0 - discount, discount};
}

void validate_weights(const BisimWeights& w) {
    if (!(w.c_R >= 0.0) || !(w.c_T >= 0.0))
        throw ModelError("metric weights must be nonnegative");
    if (w.c_R + w.c_T > 1.0 + 1e-12)
        throw ModelError("metric weights must sum to at most 1");
}

std::pair<prec_t, numvec> kantorovich_distance(const Pseudometric& d, const numvec& mu,
                                               const numvec& nu) {
    const long n = d.n;
    if (static_cast<long>(mu.size()) != n || static_cast<long>(nu.size()) != n)
        throw ModelError("marginal length does not match the metric table");
    const Polytope couplings = coupling_polytope(mu, nu);
    // inner_min trims the zero-probability rows and columns before solving
    const InnerSolution sol = inner_min(couplings, d.table);
    return {sol.value, sol.witness};
}

Pseudometric bisim_fixed_point(const Mdp& mdp, const BisimWeights& weights, prec_t eps,
                               long iteration_cap, long* sweeps_out) {
    validate_mdp(mdp);
    validate_weights(weights);
    if (!(eps > 0.0)) throw ModelError("convergence gap must be positive");
    const indvec& actions = shared_actions(mdp);
    const long n = mdp.num_states();
    const long cap = iteration_cap > 0 ? iteration_cap : 100000;

    // upper-triangle pairs; the table stays symmetric with a zero diagonal
    std::vector<std::pair<long, long>> pairs;
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    // dense successor rows are reused by every sweep
    std::vector<std::vector<numvec>> dense(n, std::vector<numvec>(mdp.num_actions()));
    for (long s = 0; s < n; ++s)
        for (long a : actions) dense[s][a] = mdp.transitions[s][a].dense(n);

    const prec_t threshold = weights.c_T > 0.0 ? eps * (1.0 - weights.c_T) / weights.c_T : 0.0;

    Pseudometric d(n);
    long sweeps = 0;
    while (true) {
        if (sweeps >= cap)
            throw IterationCapExceeded("metric iteration did not converge in " +
                                       std::to_string(cap) + " sweeps");
        Pseudometric next(n);
        std::vector<std::string> errors(pairs.size());
        parallel_for(pairs.size(), [&](size_t k) {
            const auto [i, j] = pairs[k];
            try {
                prec_t best = 0.0;
                for (long a : actions) {
                    const prec_t reward_gap =
                        weights.c_R * std::abs(mdp.rewards[i][a] - mdp.rewards[j][a]);
                    prec_t transport = 0.0;
                    if (weights.c_T > 0.0)
                        transport = kantorovich_distance(d, dense[i][a], dense[j][a]).first;
                    best = std::max(best, reward_gap + weights.c_T * transport);
                }
                next.at(i, j) = best;
                next.at(j, i) = best;
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        });
        for (size_t k = 0; k < pairs.size(); ++k)
            if (!errors[k].empty())
                throw ModelError(errors[k] + " at state pair " +
                                 std::to_string(pairs[k].first) + "," +
                                 std::to_string(pairs[k].second));

        ++sweeps;
        prec_t moved = 0.0;
        for (size_t t = 0; t < d.table.size(); ++t)
            moved = std::max(moved, std::abs(next.table[t] - d.table[t]));
        d = std::move(next);
        if (moved <= threshold) break;
    }
    if (sweeps_out) *sweeps_out = sweeps;
    return d;
}

Rmdp build_bisim_rmdp(const Mdp& mdp, long s1, long s2) {
    validate_mdp(mdp);
    const long n = mdp.num_states();
    if (s1 < 0 || s1 >= n || s2 < 0 || s2 >= n)
        throw ModelError("pair states are out of range");
    const indvec& actions = shared_actions(mdp);

    Rmdp r;
    r.action_names = mdp.action_names;
    r.discount = mdp.discount;
    r.initial_state = s1 * n + s2;
    r.state_names.reserve(n * n);
    r.enabled.assign(n * n, actions);
    r.rewards.resize(n * n);
    r.uncertainty.resize(n * n);

    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            const long pair = i * n + j;
            r.state_names.push_back(mdp.state_names[i] + "|" + mdp.state_names[j]);
            r.rewards[pair].assign(mdp.num_actions(), 0.0);
            r.uncertainty[pair].resize(mdp.num_actions());
            for (long a : actions) {
                r.rewards[pair][a] =
                    (1.0 - mdp.discount) * std::abs(mdp.rewards[i][a] - mdp.rewards[j][a]);
                r.uncertainty[pair][a] = coupling_polytope(mdp.transitions[i][a].dense(n),
                                                           mdp.transitions[j][a].dense(n));
            }
        }

    validate_rmdp(r);
    validate_rmdp_polytopes(r);
    return r;
}

prec_t bisim_via_rpi(const Mdp& mdp, long s1, long s2, const SolverConfig& config) {
    const Rmdp product = build_bisim_rmdp(mdp, s1, s2);
    const RpiResult res = robust_policy_iteration(product, config);
    return res.value.values[product.initial_state];
}

Pseudometric bisim_table_via_rpi(const Mdp& mdp, const SolverConfig& config,
                                 RpiTrace* trace_out) {
    const Rmdp product = build_bisim_rmdp(mdp, 0, 0);
    const RpiResult res = robust_policy_iteration(product, config);
    if (trace_out) *trace_out = res.trace;
    Pseudometric d(mdp.num_states());
    d.table = res.value.values;
    return d;
}

}  // namespace rmdp
