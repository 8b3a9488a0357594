#include "rmdp/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "builders.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "rmdp/robust_eval.hpp"
#include "rmdp/uncertainty.hpp"

using namespace rmdp;

namespace {

Rmdp one_state_loop() {
    Mdp m;
    m.state_names = {"s0"};
    m.action_names = {"stay"};
    m.enabled = {{0}};
    m.transitions = {{transition_from_dense(numvec{1.0})}};
    m.rewards = {{1.0}};
    m.discount = 0.9;
    return mdp_as_degenerate_rmdp(m);
}

}  // namespace

TEST_CASE("a single-action model solves in one round") {
    Xorshift64 rng(301);
    const Rmdp r = builders::random_imdp(rng, 4, 1, 0.9, 0.1);
    const RpiResult res = robust_policy_iteration(r, SolverConfig{});

    CHECK(res.trace.iterations == 1);
    CHECK(res.trace.terminated_by == RpiTermination::NoImprovingAction);
    CHECK(res.policy == Policy(4, 0));

    const ValueFunction direct = robust_policy_evaluation(r, res.policy);
    CHECK(res.value.values == direct.values);
}

TEST_CASE("degenerate models recover the classical optimum") {
    Xorshift64 rng(302);
    for (int trial = 0; trial < 10; ++trial) {
        const Mdp m = builders::random_mdp(rng, 5, 3, 0.9);
        const Rmdp r = mdp_as_degenerate_rmdp(m);
        const RpiResult res = robust_policy_iteration(r, SolverConfig{});

        const numvec lp_opt = oracle::classical_mdp_optimal_value(m);
        const numvec vi_opt = oracle::classical_value_iteration(m);
        for (long s = 0; s < 5; ++s) {
            CHECK(res.value.values[s] == doctest::Approx(lp_opt[s]).epsilon(1e-6));
            CHECK(res.value.values[s] == doctest::Approx(vi_opt[s]).epsilon(1e-5));
        }

        // optimality: the Bellman residual of the final value vanishes
        const numvec applied = robust_bellman_apply(r, res.value.values);
        for (long s = 0; s < 5; ++s)
            CHECK(std::abs(applied[s] - res.value.values[s]) <= 1e-6);
    }
}

TEST_CASE("iteration counts stay within the theoretical bound") {
    Xorshift64 rng(303);
    for (int trial = 0; trial < 5; ++trial) {
        const Rmdp r = builders::random_imdp(rng, 4, 3, 0.8, 0.1);
        const long bound = rpi_iteration_bound(r);

        // replicate the bound formula independently
        const prec_t horizon = 1.0 / (1.0 - 0.8);
        const long T = static_cast<long>(std::floor(4.0 * horizon * std::log(16.0 * horizon))) + 1;
        CHECK(bound == T * (12 - 4));

        const RpiResult res = robust_policy_iteration(r, SolverConfig{});
        if (bound > 0) CHECK(res.trace.iterations <= bound);
        CHECK(res.trace.terminated_by == RpiTermination::NoImprovingAction);
    }
}

TEST_CASE("policy iteration improves monotonically and ends flat") {
    Xorshift64 rng(304);
    const Rmdp r = builders::random_imdp(rng, 5, 3, 0.9, 0.15);
    const RpiResult res = robust_policy_iteration(r, SolverConfig{});

    for (size_t k = 1; k < res.trace.steps.size(); ++k) {
        const numvec& prev = res.trace.steps[k - 1].values;
        const numvec& next = res.trace.steps[k].values;
        for (long s = 0; s < 5; ++s) CHECK(next[s] >= prev[s] - 1e-7);
    }

    // at termination no surviving action improves beyond the margin
    const RpiIteration& last = res.trace.steps.back();
    for (long s = 0; s < 5; ++s)
        for (long a : last.surviving[s]) CHECK(last.deltas[s][a] <= 1e-7);
}

TEST_CASE("suboptimality filter evaluates the hand examples") {
    // all advantages equal: the threshold equals the common value and
    // nothing is eliminated
    const std::vector<numvec> flat{{0.3, 0.3}, {0.3, 0.3}};
    const std::vector<indvec> full{{0, 1}, {0, 1}};
    CHECK(suboptimality_filter(flat, 0.5, full) == full);

    // per-state maxima agree, so the span vanishes and only per-state
    // maximizers survive
    const std::vector<numvec> deltas{{0.0, 1.0}, {1.0, 1.0}};
    const std::vector<indvec> kept = suboptimality_filter(deltas, 0.1, full);
    CHECK(kept[0] == indvec{1});
    CHECK(kept[1] == indvec{0, 1});

    // the argmax survives any discount and the sets only shrink
    Xorshift64 rng(305);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<numvec> d(3, numvec(4));
        std::vector<indvec> cur(3, indvec{0, 1, 2, 3});
        for (auto& row : d)
            for (prec_t& x : row) x = 2.0 * rng.next_unit() - 1.0;
        const prec_t gamma = 0.95 * rng.next_unit();
        const std::vector<indvec> next = suboptimality_filter(d, gamma, cur);
        for (long s = 0; s < 3; ++s) {
            CHECK(next[s].size() <= cur[s].size());
            const long arg =
                std::max_element(d[s].begin(), d[s].end()) - d[s].begin();
            CHECK(std::find(next[s].begin(), next[s].end(), arg) != next[s].end());
        }
    }
}

TEST_CASE("the optimality test does not change the answer") {
    Xorshift64 rng(306);
    for (int trial = 0; trial < 5; ++trial) {
        const Rmdp r = builders::random_imdp(rng, 4, 3, 0.85, 0.1);
        SolverConfig plain;
        SolverConfig filtered;
        filtered.use_optimality_test = true;

        const RpiResult a = robust_policy_iteration(r, plain);
        const RpiResult b = robust_policy_iteration(r, filtered);
        for (long s = 0; s < 4; ++s)
            CHECK(a.value.values[s] == doctest::Approx(b.value.values[s]).epsilon(1e-6));
    }
}

TEST_CASE("bounded value iteration brackets the fixed point") {
    // all-zero rewards converge before the first sweep
    Xorshift64 rng(307);
    Rmdp zero = builders::random_imdp(rng, 3, 2, 0.9, 0.1);
    for (auto& row : zero.rewards) row.assign(row.size(), 0.0);
    long sweeps = -1;
    const ValueFunction vz = robust_value_iteration(zero, SolverConfig{}, &sweeps);
    CHECK(sweeps == 0);
    CHECK(vz.values == numvec(3, 0.0));

    // geometric series on the self-loop
    SolverConfig cfg;
    cfg.eps = 1e-6;
    const ValueFunction v1 = robust_value_iteration(one_state_loop(), cfg);
    CHECK(v1.values[0] == doctest::Approx(10.0).epsilon(1e-6));
    const BoundedGap& gap = std::get<BoundedGap>(v1.certificate);
    CHECK(gap.lower[0] <= 10.0 + 1e-9);
    CHECK(gap.upper[0] >= 10.0 - 1e-9);
    CHECK(gap.upper[0] - gap.lower[0] <= cfg.eps + 1e-12);

    // cross-solver agreement on a random model
    const Rmdp r = builders::random_imdp(rng, 4, 2, 0.85, 0.1);
    const ValueFunction vi = robust_value_iteration(r, cfg);
    const RpiResult pi = robust_policy_iteration(r, SolverConfig{});
    CHECK(std::abs(vi.values[r.initial_state] - pi.value.values[r.initial_state]) <= cfg.eps);

    // a one-sweep budget cannot close an initial bound spread
    SolverConfig tight;
    tight.eps = 1e-9;
    tight.iteration_cap = 1;
    const Rmdp spread = builders::random_imdp(rng, 3, 2, 0.9, 0.1);
    CHECK_THROWS_AS(robust_value_iteration(spread, tight), IterationCapExceeded);
}

TEST_CASE("value iteration bounds move monotonically toward each other") {
    Xorshift64 rng(308);
    const Rmdp r = builders::random_imdp(rng, 4, 2, 0.9, 0.15);

    prec_t rmin = inf, rmax = -inf;
    for (long s = 0; s < 4; ++s)
        for (long a : r.enabled[s]) {
            rmin = std::min(rmin, r.rewards[s][a]);
            rmax = std::max(rmax, r.rewards[s][a]);
        }
    numvec lower(4, rmin / (1.0 - r.discount));
    numvec upper(4, rmax / (1.0 - r.discount));
    for (int sweep = 0; sweep < 20; ++sweep) {
        const numvec nl = robust_bellman_apply(r, lower);
        const numvec nu = robust_bellman_apply(r, upper);
        for (long s = 0; s < 4; ++s) {
            CHECK(nl[s] >= lower[s] - 1e-9);
            CHECK(nu[s] <= upper[s] + 1e-9);
            CHECK(nl[s] <= nu[s] + 1e-9);
        }
        lower = nl;
        upper = nu;
    }
}

TEST_CASE("threshold decisions compare against the optimal value") {
    const Rmdp loop = one_state_loop();
    const ThresholdOutcome yes = threshold_decision(loop, 10.0, SolverConfig{});
    CHECK(yes.satisfied);
    CHECK(yes.bound == doctest::Approx(10.0).epsilon(1e-8));
    const ValueFunction witness = robust_policy_evaluation(loop, yes.policy);
    CHECK(witness.values[loop.initial_state] >= 10.0 - 1e-7);

    const ThresholdOutcome no = threshold_decision(loop, 10.1, SolverConfig{});
    CHECK(!no.satisfied);
    CHECK(no.bound == doctest::Approx(10.0).epsilon(1e-8));

    // agreement with the classical program on degenerate instances
    Xorshift64 rng(309);
    const Mdp m = builders::random_mdp(rng, 4, 2, 0.9);
    const Rmdp r = mdp_as_degenerate_rmdp(m);
    const prec_t opt = oracle::classical_mdp_optimal_value(m)[r.initial_state];
    CHECK(threshold_decision(r, opt - 0.01, SolverConfig{}).satisfied);
    CHECK(!threshold_decision(r, opt + 0.01, SolverConfig{}).satisfied);
}

TEST_CASE("initial policies are reproducible") {
    Xorshift64 rng(310);
    const Rmdp r = builders::random_imdp(rng, 5, 3, 0.9, 0.1);

    SolverConfig seeded;
    seeded.initial_policy = SeededPolicy{77};
    const RpiResult a = robust_policy_iteration(r, seeded);
    const RpiResult b = robust_policy_iteration(r, seeded);
    CHECK(a.policy == b.policy);
    CHECK(a.trace.iterations == b.trace.iterations);
    CHECK(a.trace.steps.front().policy == b.trace.steps.front().policy);

    // the default start is the first enabled action everywhere
    const RpiResult first = robust_policy_iteration(r, SolverConfig{});
    CHECK(first.trace.steps.front().policy == Policy(5, 0));

    // optimal value is independent of the starting point
    for (long s = 0; s < 5; ++s)
        CHECK(a.value.values[s] == doctest::Approx(first.value.values[s]).epsilon(1e-6));
}

TEST_CASE("the iteration cap returns the best policy found so far") {
    Xorshift64 rng(311);
    const Rmdp r = builders::random_imdp(rng, 5, 3, 0.9, 0.1);

    SolverConfig capped;
    capped.iteration_cap = 1;
    const RpiResult res = robust_policy_iteration(r, capped);
    CHECK(res.trace.iterations == 1);

    const RpiResult full = robust_policy_iteration(r, SolverConfig{});
    if (full.trace.iterations > 1) {
        CHECK(res.trace.terminated_by == RpiTermination::IterationCap);
        // the returned value is the exact value of the returned policy
        const ValueFunction direct = robust_policy_evaluation(r, res.policy);
        CHECK(res.value.values == direct.values);
    }
}

TEST_CASE("mixed uncertainty representations are rejected") {
    Xorshift64 rng(312);
    Rmdp r = builders::random_imdp(rng, 3, 2, 0.9, 0.1);
    r.uncertainty[1][1] = l1_to_lifted_polytope(oracle::random_distribution(rng, 3), 0.1);
    CHECK_THROWS_AS(robust_policy_iteration(r, SolverConfig{}), ModelError);
}
