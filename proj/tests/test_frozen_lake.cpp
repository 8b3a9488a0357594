#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "rmdp/bisim.hpp"
#include "rmdp/frozen_lake.hpp"
#include "rmdp/model.hpp"

using namespace rmdp;

static const std::string kClassicMap = "SFFF;FHFH;FFFH;HFFG";

TEST_CASE("map drawings turn into hole bitmaps") {
    const auto holes = holes_from_map(kClassicMap);
    REQUIRE(holes.size() == 16);
    std::vector<long> hole_cells;
    for (long i = 0; i < 16; ++i)
        if (holes[i]) hole_cells.push_back(i);
    CHECK(hole_cells == std::vector<long>{5, 7, 11, 12});

    // Newlines and padding are as good as semicolons.
    CHECK(holes_from_map("S F\nFG") == std::vector<char>{0, 0, 0, 0});

    CHECK_THROWS_AS(holes_from_map("SF;FGF"), InvalidLayout);   // ragged
    CHECK_THROWS_AS(holes_from_map("SF"), InvalidLayout);       // one row
    CHECK_THROWS_AS(holes_from_map("HF;FG"), InvalidLayout);    // hole on start
    CHECK_THROWS_AS(holes_from_map("SF;FH"), InvalidLayout);    // hole on goal
    CHECK_THROWS_AS(holes_from_map("SG;FG"), InvalidLayout);    // misplaced G
    CHECK_THROWS_AS(holes_from_map("SF;XG"), InvalidLayout);    // unknown char
}

TEST_CASE("seeded layouts are reproducible and respect the endpoints") {
    CHECK(frozen_lake_random_holes(5, 17) == frozen_lake_random_holes(5, 17));
    CHECK(frozen_lake_random_holes(5, 17) != frozen_lake_random_holes(5, 18));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto holes = frozen_lake_random_holes(4, seed);
        CHECK_FALSE(holes.front());
        CHECK_FALSE(holes.back());
    }
    const auto none = frozen_lake_random_holes(4, 3, 0.0);
    CHECK(std::count(none.begin(), none.end(), 1) == 0);
    const auto all = frozen_lake_random_holes(4, 3, 1.0);
    CHECK(std::count(all.begin(), all.end(), 1) == 14);
    CHECK_THROWS_AS(frozen_lake_random_holes(1, 0), InvalidLayout);
    CHECK_THROWS_AS(frozen_lake_random_holes(4, 0, 1.5), InvalidLayout);
}

TEST_CASE("a 2x2 lake without holes is a valid stochastic MDP") {
    const auto mdp = frozen_lake_mdp(2, 1.0 / 3.0, {0, 0, 0, 0});
    REQUIRE(mdp.num_states() == 4);
    REQUIRE(mdp.num_actions() == 4);
    for (long s = 0; s < 4; ++s)
        for (long a = 0; a < 4; ++a)
            CHECK(mdp.transitions[s][a].sum() == doctest::Approx(1.0).epsilon(1e-12));

    // Start cell, action up: the intended move and the left slip both bounce
    // off the wall and merge on the start cell; the right slip reaches cell 1.
    const auto& bounce = mdp.transitions[0][0];
    REQUIRE(bounce.succs == indvec{0, 1});
    CHECK(bounce.probs[0] == doctest::Approx(2.0 / 3.0 + 1.0 / 6.0));
    CHECK(bounce.probs[1] == doctest::Approx(1.0 / 6.0));

    // The goal absorbs with zero reward under every action.
    for (long a = 0; a < 4; ++a) {
        CHECK(mdp.transitions[3][a].succs == indvec{3});
        CHECK(mdp.rewards[3][a] == 0.0);
    }

    // Moving right from the start: goal is unreachable in one step, so the
    // reward is the plain step cost.
    CHECK(mdp.rewards[0][3] == doctest::Approx(-1.0));
    // Moving right from cell 2 reaches the goal with probability 2/3.
    CHECK(mdp.rewards[2][3] == doctest::Approx(-1.0 + 100.0 * 2.0 / 3.0));
}

TEST_CASE("zero slip gives a deterministic MDP") {
    const auto mdp = frozen_lake_mdp(3, 0.0, std::vector<char>(9, 0));
    for (long s = 0; s < mdp.num_states(); ++s)
        for (long a = 0; a < 4; ++a) {
            REQUIRE(mdp.transitions[s][a].size() == 1);
            CHECK(mdp.transitions[s][a].probs[0] == 1.0);
        }
    // Deterministic moves either step or bounce.
    CHECK(mdp.transitions[4][0].succs == indvec{1});  // center, up
    CHECK(mdp.transitions[0][2].succs == indvec{0});  // start, left bounces
}

TEST_CASE("rewards mix goal and hole hits on the classic 4x4 map") {
    const auto mdp = frozen_lake_mdp(4, 1.0 / 3.0, holes_from_map(kClassicMap));
    // Cell 14 moving right: goal with 2/3, up to the free cell 10 with 1/6,
    // down bounces back with 1/6. No hole is touched.
    CHECK(mdp.rewards[14][3] == doctest::Approx(-1.0 + 100.0 * 2.0 / 3.0));
    // Cell 6 moving down: cell 10 with 2/3, the flanking cells 5 and 7 are
    // both holes and each catches a 1/6 slip.
    CHECK(mdp.rewards[6][1] == doctest::Approx(-1.0 - 10.0 * (1.0 / 6.0 + 1.0 / 6.0)));
    // Holes absorb.
    CHECK(mdp.transitions[5][2].succs == indvec{5});
    CHECK(mdp.rewards[5][2] == 0.0);

    CHECK_THROWS_AS(frozen_lake_mdp(4, -0.1, holes_from_map(kClassicMap)), ModelError);
    CHECK_THROWS_AS(frozen_lake_mdp(4, 0.1, {0, 0, 0, 0}), InvalidLayout);
}

TEST_CASE("the goal paired with itself has bisimulation distance zero") {
    const auto mdp = frozen_lake_mdp(2, 0.25, {0, 0, 0, 0});
    const auto res = bisim_via_rpi(mdp, 3, 3, {});
    CHECK(res == doctest::Approx(0.0).epsilon(1e-9));
}
