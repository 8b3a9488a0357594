#include "rmdp/robust_eval.hpp"

#include <algorithm>
#include <cmath>

#include "builders.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "rmdp/uncertainty.hpp"

using namespace rmdp;

TEST_CASE("inner minimization finds the cheapest vertex") {
    // full simplex: the minimum is the smallest value entry
    const Polytope simplex = simplex_over_support(indvec{0, 1, 2}, 3);
    const InnerSolution s = inner_min(simplex, numvec{0.5, 0.2, 0.9});
    CHECK(s.value == doctest::Approx(0.2));
    CHECK(s.witness[1] == doctest::Approx(1.0));

    // box [0,1]^2 with the mass constraint: puts everything on the zero entry
    const Polytope box = imdp_to_polytope(numvec{0.0, 0.0}, numvec{1.0, 1.0});
    const InnerSolution b = inner_min(box, numvec{0.0, 1.0});
    CHECK(b.value == doctest::Approx(0.0));
    CHECK(b.witness == numvec{1.0, 0.0});

    // constant values are immune to the adversary: the mass rows force sum 1
    const Polytope tight = imdp_to_polytope(numvec{0.1, 0.2, 0.1}, numvec{0.6, 0.8, 0.5});
    const InnerSolution c = inner_min(tight, numvec{0.7, 0.7, 0.7});
    CHECK(c.value == doctest::Approx(0.7));

    CHECK_THROWS_AS(inner_min(box, numvec{1.0, 2.0, 3.0}), ModelError);
    const Polytope empty = imdp_to_polytope(numvec{0.6, 0.6}, numvec{0.7, 0.7});
    CHECK_THROWS_AS(inner_min(empty, numvec{0.0, 0.0}), EmptyUncertainty);
}

TEST_CASE("inner minimization agrees with vertex enumeration") {
    Xorshift64 rng(91);
    for (int trial = 0; trial < 20; ++trial) {
        const numvec center = oracle::random_distribution(rng, 3);
        const prec_t eps = 0.05 + 0.3 * rng.next_unit();
        const Polytope p = imdp_to_polytope(linf_to_imdp(center, eps));
        numvec v(3);
        for (prec_t& x : v) x = 2.0 * rng.next_unit() - 1.0;

        prec_t best = inf;
        for (const numvec& vert : oracle::polytope_vertices(p)) {
            prec_t dot = 0.0;
            for (long j = 0; j < 3; ++j) dot += vert[j] * v[j];
            best = std::min(best, dot);
        }

        const InnerSolution s = inner_min(p, v);
        CHECK(s.value == doctest::Approx(best).epsilon(1e-8));
        // witness invariants: feasible and consistent with the value
        CHECK(oracle::point_in_polytope(p, s.witness, 1e-7));
        prec_t dot = 0.0;
        for (long j = 0; j < 3; ++j) dot += s.witness[j] * v[j];
        CHECK(std::abs(dot - s.value) < 1e-7);
    }
}

TEST_CASE("inner minimization over a lifted ball matches its geometry") {
    Xorshift64 rng(92);
    for (int trial = 0; trial < 10; ++trial) {
        const numvec center = oracle::random_distribution(rng, 3);
        const prec_t eps = 0.05 + 0.5 * rng.next_unit();
        const Polytope lifted = l1_to_lifted_polytope(center, eps);
        numvec v(3);
        for (prec_t& x : v) x = 2.0 * rng.next_unit() - 1.0;

        // the lifted vertices project onto the ball; the objective ignores
        // the auxiliary block, so the projected minimum is the ball minimum
        prec_t best = inf;
        for (const numvec& vert : oracle::polytope_vertices(lifted)) {
            prec_t dot = 0.0;
            for (long j = 0; j < 3; ++j) dot += vert[j] * v[j];
            best = std::min(best, dot);
        }

        const InnerSolution s = inner_min(lifted, v);
        CHECK(s.value == doctest::Approx(best).epsilon(1e-8));
        CHECK(oracle::l1_dist(s.witness, center) <= eps + 1e-7);
    }
}

TEST_CASE("robust Bellman operator generalizes the classical one") {
    Xorshift64 rng(93);
    const Mdp m = builders::random_mdp(rng, 5, 3, 0.9);
    const Rmdp r = mdp_as_degenerate_rmdp(m);

    numvec v(5);
    for (prec_t& x : v) x = 2.0 * rng.next_unit() - 1.0;

    const numvec robust = robust_bellman_apply(r, v);
    for (long s = 0; s < 5; ++s) {
        prec_t best = -inf;
        for (long a : m.enabled[s])
            best = std::max(best, m.rewards[s][a] + m.discount * m.transitions[s][a].expectation(v));
        CHECK(robust[s] == doctest::Approx(best).epsilon(1e-9));
    }

    // at v = 0 the operator reduces to the best immediate reward
    const numvec at_zero = robust_bellman_apply(r, numvec(5, 0.0));
    for (long s = 0; s < 5; ++s) {
        prec_t best = -inf;
        for (long a : m.enabled[s]) best = std::max(best, m.rewards[s][a]);
        CHECK(at_zero[s] == doctest::Approx(best));
    }
}

TEST_CASE("robust Bellman operator is a discount-factor contraction") {
    Xorshift64 rng(94);
    const Rmdp r = builders::random_imdp(rng, 4, 3, 0.9, 0.2);
    for (int trial = 0; trial < 20; ++trial) {
        numvec v(4), w(4);
        for (prec_t& x : v) x = 4.0 * rng.next_unit() - 2.0;
        for (prec_t& x : w) x = 4.0 * rng.next_unit() - 2.0;
        const numvec bv = robust_bellman_apply(r, v);
        const numvec bw = robust_bellman_apply(r, w);
        CHECK(linf_dist(bv, bw) <= r.discount * linf_dist(v, w) + 1e-9);
    }
}

TEST_CASE("parallel and serial Bellman kernels agree bitwise") {
    Xorshift64 rng(95);
    const Rmdp r = builders::random_imdp(rng, 6, 3, 0.85, 0.15);
    numvec v(6);
    for (prec_t& x : v) x = 2.0 * rng.next_unit() - 1.0;
    const numvec par = robust_bellman_apply(r, v);
    const numvec ser = robust_bellman_apply_serial(r, v);
    CHECK(par == ser);

    Policy greedy;
    const numvec with_argmax = robust_bellman_greedy(r, v, greedy);
    CHECK(with_argmax == par);
    for (long s = 0; s < 6; ++s) {
        const prec_t q = r.rewards[s][greedy[s]] +
                         r.discount * inner_min(r.uncertainty[s][greedy[s]], v).value;
        CHECK(q == doctest::Approx(par[s]).epsilon(1e-9));
    }
}

TEST_CASE("policy evaluation solves a self-loop in closed form") {
    Mdp m;
    m.state_names = {"s0"};
    m.action_names = {"stay"};
    m.enabled = {{0}};
    m.transitions = {{transition_from_dense(numvec{1.0})}};
    m.rewards = {{1.0}};
    m.discount = 0.9;
    const Rmdp r = mdp_as_degenerate_rmdp(m);

    const ValueFunction vf = robust_policy_evaluation(r, Policy{0});
    CHECK(vf.values[0] == doctest::Approx(10.0).epsilon(1e-8));
    CHECK(std::holds_alternative<LpExact>(vf.certificate));
}

TEST_CASE("degenerate evaluation equals the direct linear solve") {
    Xorshift64 rng(96);
    for (int trial = 0; trial < 10; ++trial) {
        const Mdp m = builders::random_mdp(rng, 5, 3, 0.9);
        const Rmdp r = mdp_as_degenerate_rmdp(m);
        Policy pi(5);
        for (long s = 0; s < 5; ++s) pi[s] = rng.next_below(3);

        const numvec direct = oracle::mdp_policy_value(m, pi);
        const ValueFunction vf = robust_policy_evaluation(r, pi);
        for (long s = 0; s < 5; ++s)
            CHECK(vf.values[s] == doctest::Approx(direct[s]).epsilon(1e-6));
    }
}

TEST_CASE("interval evaluation equals the vertex-assignment minimum") {
    Xorshift64 rng(97);
    for (int trial = 0; trial < 10; ++trial) {
        const Rmdp r = builders::random_imdp(rng, 3, 2, 0.8, 0.1 + 0.2 * rng.next_unit());
        Policy pi(3);
        for (long s = 0; s < 3; ++s) pi[s] = rng.next_below(2);

        const numvec brute = oracle::robust_policy_value_by_vertices(r, pi);
        const ValueFunction vf = robust_policy_evaluation(r, pi);
        for (long s = 0; s < 3; ++s)
            CHECK(vf.values[s] == doctest::Approx(brute[s]).epsilon(1e-8));

        // fixed-point consistency of the evaluated value
        for (long s = 0; s < 3; ++s) {
            const prec_t rhs = r.rewards[s][pi[s]] +
                               r.discount * inner_min(r.uncertainty[s][pi[s]], vf.values).value;
            CHECK(vf.values[s] == doctest::Approx(rhs).epsilon(1e-6));
        }
    }
}

TEST_CASE("widening the intervals never helps the agent") {
    Xorshift64 rng(98);
    rmdp::Rmdp narrow = builders::rmdp_frame(rng, 4, 2, 0.9);
    rmdp::Rmdp wide = narrow;
    for (long s = 0; s < 4; ++s)
        for (long a = 0; a < 2; ++a) {
            const numvec center = oracle::random_distribution(rng, 4);
            narrow.uncertainty[s].push_back(imdp_to_polytope(linf_to_imdp(center, 0.05)));
            wide.uncertainty[s].push_back(imdp_to_polytope(linf_to_imdp(center, 0.25)));
        }
    const Policy pi(4, 0);
    const ValueFunction vn = robust_policy_evaluation(narrow, pi);
    const ValueFunction vw = robust_policy_evaluation(wide, pi);
    for (long s = 0; s < 4; ++s) CHECK(vw.values[s] <= vn.values[s] + 1e-9);
}

TEST_CASE("evaluation rejects mixed and mismatched representations") {
    Xorshift64 rng(99);
    const Rmdp plain = builders::random_imdp(rng, 3, 2, 0.9, 0.1);
    const Rmdp lifted = builders::random_l1_rmdp(rng, 3, 2, 0.9, 0.1);
    const Policy pi(3, 0);

    CHECK_THROWS_AS(robust_policy_evaluation(lifted, pi), ModelError);
    CHECK_THROWS_AS(robust_policy_evaluation_lifted(plain, pi), ModelError);

    // empty uncertainty is reported as such
    Rmdp broken = plain;
    broken.uncertainty[1][0] = imdp_to_polytope(numvec{0.6, 0.6, 0.6}, numvec{0.7, 0.7, 0.7});
    CHECK_THROWS_AS(robust_policy_evaluation(broken, Policy(3, 0)), EmptyUncertainty);
}

TEST_CASE("lifted evaluation agrees with its limits and the fixed point") {
    Xorshift64 rng(100);

    // radius zero collapses the ball to its center distribution
    const Mdp m = builders::random_mdp(rng, 3, 2, 0.85);
    Rmdp zero = mdp_as_degenerate_rmdp(m);
    for (long s = 0; s < 3; ++s)
        for (long a = 0; a < 2; ++a)
            zero.uncertainty[s][a] =
                l1_to_lifted_polytope(m.transitions[s][a].dense(3), 0.0);
    Policy pi(3);
    for (long s = 0; s < 3; ++s) pi[s] = rng.next_below(2);
    const ValueFunction vz = robust_policy_evaluation_lifted(zero, pi);
    const numvec direct = oracle::mdp_policy_value(m, pi);
    for (long s = 0; s < 3; ++s)
        CHECK(vz.values[s] == doctest::Approx(direct[s]).epsilon(1e-6));

    // radius two covers the whole simplex
    Rmdp ball = builders::random_l1_rmdp(rng, 3, 2, 0.85, 2.0);
    Rmdp free_simplex = ball;
    for (long s = 0; s < 3; ++s)
        for (long a = 0; a < 2; ++a)
            free_simplex.uncertainty[s][a] = simplex_over_support(indvec{0, 1, 2}, 3);
    const ValueFunction vb = robust_policy_evaluation_lifted(ball, pi);
    const ValueFunction vs = robust_policy_evaluation(free_simplex, pi);
    for (long s = 0; s < 3; ++s)
        CHECK(vb.values[s] == doctest::Approx(vs.values[s]).epsilon(1e-8));

    // general radius: agree with the iterated policy operator
    const Rmdp r = builders::random_l1_rmdp(rng, 3, 2, 0.85, 0.3);
    const Rmdp fixed = builders::restrict_to_policy(r, pi);
    numvec v(3, 0.0);
    for (int it = 0; it < 400; ++it) {
        const numvec next = robust_bellman_apply(fixed, v);
        const prec_t gap = linf_dist(next, v);
        v = next;
        if (gap < 1e-12) break;
    }
    const ValueFunction vf = robust_policy_evaluation_lifted(r, pi);
    for (long s = 0; s < 3; ++s)
        CHECK(vf.values[s] == doctest::Approx(v[s]).epsilon(1e-6));
}
