#include "rmdp/bisim.hpp"

#include <algorithm>
#include <cmath>

#include "builders.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "rmdp/robust_eval.hpp"
#include "rmdp/uncertainty.hpp"

using namespace rmdp;

namespace {

/// Two absorbing states with a single action; the metric between them has a
/// geometric-series closed form.
Mdp two_absorbing(prec_t r0, prec_t r1, prec_t discount) {
    Mdp m;
    m.state_names = {"s0", "s1"};
    m.action_names = {"stay"};
    m.enabled = {{0}, {0}};
    m.transitions = {{transition_from_dense(numvec{1.0, 0.0})},
                     {transition_from_dense(numvec{0.0, 1.0})}};
    m.rewards = {{r0}, {r1}};
    m.discount = discount;
    return m;
}

void check_pseudometric_axioms(const Pseudometric& d, prec_t tol) {
    for (long i = 0; i < d.n; ++i) {
        CHECK(std::abs(d.at(i, i)) <= tol);
        for (long j = 0; j < d.n; ++j) {
            CHECK(d.at(i, j) >= -tol);
            CHECK(std::abs(d.at(i, j) - d.at(j, i)) <= tol);
            for (long k = 0; k < d.n; ++k)
                CHECK(d.at(i, k) <= d.at(i, j) + d.at(j, k) + tol);
        }
    }
}

}  // namespace

TEST_CASE("transport distance basics") {
    Xorshift64 rng(401);

    // equal marginals admit the diagonal coupling
    Pseudometric d(3);
    d.at(0, 1) = d.at(1, 0) = 0.7;
    d.at(0, 2) = d.at(2, 0) = 0.4;
    d.at(1, 2) = d.at(2, 1) = 0.5;
    const numvec mu = oracle::random_distribution(rng, 3);
    CHECK(kantorovich_distance(d, mu, mu).first == doctest::Approx(0.0).epsilon(1e-9));

    // the zero metric makes every transport free
    const Pseudometric zero(3);
    const numvec nu = oracle::random_distribution(rng, 3);
    CHECK(kantorovich_distance(zero, mu, nu).first == doctest::Approx(0.0));

    CHECK_THROWS_AS(kantorovich_distance(zero, mu, numvec{0.5, 0.5}), ModelError);
}

TEST_CASE("discrete-metric transport equals total variation") {
    Xorshift64 rng(402);
    for (int trial = 0; trial < 20; ++trial) {
        const long n = 3 + static_cast<long>(rng.next_below(3));
        Pseudometric d(n);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) d.at(i, j) = i == j ? 0.0 : 1.0;
        const numvec mu = oracle::random_distribution(rng, n);
        const numvec nu = oracle::random_distribution(rng, n);

        const auto [dist, coupling] = kantorovich_distance(d, mu, nu);
        CHECK(dist == doctest::Approx(0.5 * oracle::l1_dist(mu, nu)).epsilon(1e-8));

        // the witness is a genuine coupling consistent with the value
        prec_t cost = 0.0;
        for (long r = 0; r < n; ++r) {
            prec_t row_sum = 0.0, col_sum = 0.0;
            for (long c = 0; c < n; ++c) {
                row_sum += coupling[r * n + c];
                col_sum += coupling[c * n + r];
                cost += coupling[r * n + c] * d.at(r, c);
            }
            CHECK(row_sum == doctest::Approx(mu[r]).epsilon(1e-7));
            CHECK(col_sum == doctest::Approx(nu[r]).epsilon(1e-7));
        }
        CHECK(cost == doctest::Approx(dist).epsilon(1e-7));
    }
}

TEST_CASE("fixed point vanishes for indistinguishable states") {
    // both states have the same reward and the same successor distribution
    Mdp m;
    m.state_names = {"x", "y"};
    m.action_names = {"a"};
    m.enabled = {{0}, {0}};
    m.transitions = {{transition_from_dense(numvec{0.5, 0.5})},
                     {transition_from_dense(numvec{0.5, 0.5})}};
    m.rewards = {{0.3}, {0.3}};
    m.discount = 0.9;

    const Pseudometric d = bisim_fixed_point(m, default_bisim_weights(0.9), 1e-8);
    CHECK(d.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("fixed point matches the absorbing closed form") {
    const Mdp m = two_absorbing(0.8, 0.2, 0.9);
    const BisimWeights w{0.4, 0.6};
    long sweeps = 0;
    const Pseudometric d = bisim_fixed_point(m, w, 1e-9, 0, &sweeps);

    // only coupling of two point masses is the product point mass, so the
    // operator is d -> c_R * 0.6 + c_T * d with fixed point below
    CHECK(d.at(0, 1) == doctest::Approx(0.4 * 0.6 / (1.0 - 0.6)).epsilon(1e-7));
    CHECK(d.at(1, 0) == doctest::Approx(d.at(0, 1)));
    CHECK(d.at(0, 0) == 0.0);
    CHECK(sweeps >= 1);

    // weight-zero transport converges in a bounded number of sweeps
    long quick = 0;
    const Pseudometric flat = bisim_fixed_point(m, BisimWeights{1.0, 0.0}, 1e-9, 0, &quick);
    CHECK(flat.at(0, 1) == doctest::Approx(0.6));
    CHECK(quick <= 2);
}

TEST_CASE("fixed point rejects bad inputs") {
    const Mdp m = two_absorbing(0.5, 0.5, 0.9);
    CHECK_THROWS_AS(bisim_fixed_point(m, BisimWeights{-0.1, 0.5}, 1e-6), ModelError);
    CHECK_THROWS_AS(bisim_fixed_point(m, BisimWeights{0.6, 0.6}, 1e-6), ModelError);
    CHECK_THROWS_AS(bisim_fixed_point(m, default_bisim_weights(0.9), 0.0), ModelError);

    // states with different action sets cannot be paired
    Mdp uneven = m;
    uneven.action_names = {"stay", "jump"};
    uneven.enabled = {{0, 1}, {0}};
    uneven.transitions[0].push_back(transition_from_dense(numvec{0.0, 1.0}));
    uneven.transitions[1].push_back(transition_from_dense(numvec{1.0, 0.0}));
    uneven.rewards[0].push_back(0.1);
    uneven.rewards[1].push_back(0.2);
    CHECK_THROWS_AS(bisim_fixed_point(uneven, default_bisim_weights(0.9), 1e-6),
                    ActionMismatch);
    CHECK_THROWS_AS(build_bisim_rmdp(uneven, 0, 1), ActionMismatch);

    // a cap of one sweep cannot converge here
    CHECK_THROWS_AS(bisim_fixed_point(two_absorbing(0.9, 0.1, 0.9),
                                      default_bisim_weights(0.9), 1e-9, 1),
                    IterationCapExceeded);
}

TEST_CASE("product model pairs states with coupling uncertainty") {
    Xorshift64 rng(403);
    const Mdp m = builders::random_mdp(rng, 3, 2, 0.9);
    const Rmdp product = build_bisim_rmdp(m, 1, 2);

    REQUIRE(product.num_states() == 9);
    CHECK(product.initial_state == 1 * 3 + 2);
    CHECK(product.state_names[1 * 3 + 2] == "s1|s2");
    CHECK(product.discount == m.discount);

    for (long i = 0; i < 3; ++i) {
        // identical pairs carry zero reward and admit the diagonal coupling
        const long pair = i * 3 + i;
        for (long a = 0; a < 2; ++a) {
            CHECK(product.rewards[pair][a] == 0.0);
            const numvec p = m.transitions[i][a].dense(3);
            numvec diagonal(9, 0.0);
            for (long t = 0; t < 3; ++t) diagonal[t * 3 + t] = p[t];
            CHECK(oracle::point_in_polytope(product.uncertainty[pair][a], diagonal, 1e-9));
        }
    }
}

TEST_CASE("the three engines agree on random models") {
    Xorshift64 rng(404);
    SolverConfig cfg;
    cfg.eps = 1e-6;
    for (int trial = 0; trial < 3; ++trial) {
        const Mdp m = builders::random_mdp(rng, 4, 2, 0.9);

        RpiTrace trace;
        const Pseudometric via_rpi = bisim_table_via_rpi(m, cfg, &trace);
        const Pseudometric direct = bisim_fixed_point(m, default_bisim_weights(0.9), 1e-7);

        for (long i = 0; i < 4; ++i)
            for (long j = 0; j < 4; ++j)
                CHECK(std::abs(via_rpi.at(i, j) - direct.at(i, j)) <= 1e-5);

        // bounded value iteration on the product agrees at a sampled pair
        const Rmdp product = build_bisim_rmdp(m, 0, 3);
        const ValueFunction rvi = robust_value_iteration(product, cfg);
        CHECK(std::abs(rvi.values[product.initial_state] - via_rpi.at(0, 3)) <= 1e-5);

        // single-pair entry point and the table agree exactly on the value
        CHECK(bisim_via_rpi(m, 0, 3, cfg) == doctest::Approx(via_rpi.at(0, 3)).epsilon(1e-9));
        CHECK(bisim_via_rpi(m, 2, 2, cfg) == doctest::Approx(0.0));

        check_pseudometric_axioms(via_rpi, 1e-7);
        check_pseudometric_axioms(direct, 1e-7);
    }
}

TEST_CASE("product value table is symmetric") {
    Xorshift64 rng(405);
    const Mdp m = builders::random_mdp(rng, 3, 2, 0.85);
    const Pseudometric d = bisim_table_via_rpi(m, SolverConfig{});
    for (long i = 0; i < 3; ++i)
        for (long j = 0; j < 3; ++j) CHECK(std::abs(d.at(i, j) - d.at(j, i)) <= 1e-7);
}

TEST_CASE("absorbing pair solved through the product reduction") {
    const Mdp m = two_absorbing(0.9, 0.1, 0.9);
    // default weights: c_R = 0.1, c_T = 0.9, so d* = 0.1*0.8/0.1 = 0.8
    const prec_t val = bisim_via_rpi(m, 0, 1, SolverConfig{});
    CHECK(val == doctest::Approx(0.1 * 0.8 / (1.0 - 0.9)).epsilon(1e-6));
}
