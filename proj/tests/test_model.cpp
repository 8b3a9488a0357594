#include "rmdp/model.hpp"

#include "doctest.h"

using namespace rmdp;

namespace {

/// Two-state chain: action 0 loops, action 1 moves to the other state.
Mdp two_state_chain() {
    Mdp m;
    m.state_names = {"s0", "s1"};
    m.action_names = {"stay", "move"};
    m.enabled = {{0, 1}, {0, 1}};
    m.transitions = {
        {Transition({0}, {1.0}), Transition({1}, {1.0})},
        {Transition({1}, {1.0}), Transition({0}, {1.0})},
    };
    m.rewards = {{1.0, 0.0}, {0.0, 2.0}};
    m.initial_state = 0;
    m.discount = 0.9;
    return m;
}

}  // namespace

TEST_CASE("model: a well-formed mdp validates") {
    CHECK_NOTHROW(validate_mdp(two_state_chain()));
}

TEST_CASE("model: broken stochasticity is rejected") {
    Mdp m = two_state_chain();
    m.transitions[0][0].probs[0] = 0.5;
    CHECK_THROWS_AS(validate_mdp(m), ModelError);

    m = two_state_chain();
    m.transitions[1][1].probs = {-0.2};
    CHECK_THROWS_AS(validate_mdp(m), ModelError);
}

TEST_CASE("model: structural defects are rejected") {
    Mdp m = two_state_chain();
    m.discount = 1.0;
    CHECK_THROWS_AS(validate_mdp(m), ModelError);

    m = two_state_chain();
    m.enabled[0].clear();
    CHECK_THROWS_AS(validate_mdp(m), ModelError);

    m = two_state_chain();
    m.initial_state = 5;
    CHECK_THROWS_AS(validate_mdp(m), ModelError);

    m = two_state_chain();
    m.rewards[0][0] = std::numeric_limits<prec_t>::infinity();
    CHECK_THROWS_AS(validate_mdp(m), ModelError);
}

TEST_CASE("model: stochasticity tolerance admits rounding noise") {
    Mdp m = two_state_chain();
    m.transitions[0][0] = Transition({0, 1}, {0.5, 0.5 + 5e-10});
    CHECK_NOTHROW(validate_mdp(m));
}

TEST_CASE("model: degenerate rmdp has canonical interval rows") {
    const Mdp m = two_state_chain();
    const Rmdp r = mdp_as_degenerate_rmdp(m);
    CHECK_NOTHROW(validate_rmdp(r));
    CHECK(r.num_states() == 2);

    // 2k+2 rows over k columns: simplex pair then the two interval blocks
    const Polytope& u = r.uncertainty[0][1];
    CHECK(u.dim == 2);
    CHECK(u.num_rows() == 6);
    CHECK(u.num_eq_rows() == 0);
    CHECK(u.rhs[0] == -1.0);
    CHECK(u.rhs[1] == 1.0);
    // lower block: -x <= -p pins x >= p
    CHECK(u.rhs[2] == doctest::Approx(0.0));
    CHECK(u.rhs[3] == doctest::Approx(-1.0));
    // upper block: x <= p
    CHECK(u.rhs[4] == doctest::Approx(0.0));
    CHECK(u.rhs[5] == doctest::Approx(1.0));
}

TEST_CASE("model: policy validation") {
    const Mdp m = two_state_chain();
    CHECK_NOTHROW(validate_policy(m, Policy{0, 1}));
    CHECK_THROWS_AS(validate_policy(m, Policy{0}), ModelError);
    CHECK_THROWS_AS(validate_policy(m, Policy{0, 2}), ModelError);
}

TEST_CASE("model: polytope shape validation") {
    Polytope p;
    p.dim = 2;
    p.rows = {SparseRow({0, 1}, {1.0, 1.0})};
    p.rhs = {1.0};
    CHECK_NOTHROW(validate_polytope_shape(p));

    p.lifted_split = 3;  // beyond dim
    CHECK_THROWS_AS(validate_polytope_shape(p), ModelError);
    p.lifted_split = 1;
    CHECK_NOTHROW(validate_polytope_shape(p));

    Polytope empty;
    empty.dim = 2;
    CHECK_THROWS_AS(validate_polytope_shape(empty), ModelError);
}

TEST_CASE("model: game validation") {
    DiscountedGame g;
    g.state_names = {"a", "b"};
    g.action_names = {"act"};
    g.successors = {{{0, 1}}, {{1}}};
    g.rewards = {{1.0}, {0.0}};
    g.initial_state = 0;
    g.discount = 0.5;
    CHECK_NOTHROW(validate_game(g));

    g.successors[1][0].clear();
    CHECK_THROWS_AS(validate_game(g), ModelError);
}
