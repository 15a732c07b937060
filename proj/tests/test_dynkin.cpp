#include <cmath>
#include <vector>

#include "doctest.h"
#include "rbsde/dynkin.hpp"
#include "rbsde/scenario.hpp"
#include "support.hpp"

using namespace rbsde;
using testsupport::grid_gap;

namespace {

Generator zero_gen() {
    Generator g;
    g.name = "zero";
    g.eval = [](int, int, double, std::span<const double>) { return 0.0; };
    return g;
}

// Counterexample data with an upper barrier bolted on at the given level.
RBSDEInput boxed_input(double u0, double u1 = 6.0, double l0 = 2.0) {
    SpacePtr sp = counterexample_space();
    auto lower = AdaptedProcess::from_rows(sp, {{l0, l0}, {0, 0}, {0, 0}});
    auto upper = AdaptedProcess::from_rows(sp, {{u0, u0}, {u1, u1}, {10, 10}});
    return make_input(sp, {5.0, 1.0}, zero_gen(), lower, upper);
}

}  // namespace

TEST_CASE("pathwise payoffs of pinned stopping pairs") {
    RBSDEInput in = boxed_input(12.0, 10.0);
    Solution sol = solve_reflected(in);
    DynkinGame game{&in, &sol.y};
    game.validate();

    StoppingTime at_end{{2, 2}};
    StoppingTime at_start{{0, 0}};
    StoppingTime at_split{{1, 1}};

    // Neither side stops early: both collect the terminal value.
    auto hold = game_payoff(game, at_end, at_end, 0);
    CHECK(hold[0] == 5.0);
    CHECK(hold[1] == 1.0);

    // The maximizer stops immediately (ties go to the maximizer).
    auto grab = game_payoff(game, at_end, at_start, 0);
    CHECK(grab[0] == 2.0);
    CHECK(grab[1] == 2.0);

    // The minimizer stops strictly first and pays the upper barrier.
    auto cap = game_payoff(game, at_start, at_end, 0);
    CHECK(cap[0] == 12.0);
    CHECK(cap[1] == 12.0);

    // Simultaneous stop at the split, started from the split.
    auto both = game_payoff(game, at_split, at_split, 1);
    CHECK(both[0] == 0.0);
    CHECK(both[1] == 0.0);
}

TEST_CASE("running reward accrues until the first stop") {
    SpacePtr sp = counterexample_space();
    auto lower = AdaptedProcess::from_rows(sp, {{2, 2}, {0, 0}, {0, 0}});
    auto upper = AdaptedProcess::from_rows(sp, {{12, 12}, {10, 10}, {10, 10}});
    auto drift = AdaptedProcess::from_rows(sp, {{0, 0}, {0.4, 0.4}, {0.9, -0.1}});
    RBSDEInput in = make_input(sp, {5.0, 1.0}, zero_gen(), lower, upper, drift);
    Solution sol = solve_reflected(in);
    DynkinGame game{&in, &sol.y};

    StoppingTime at_end{{2, 2}};
    auto hold = game_payoff(game, at_end, at_end, 0);
    CHECK(hold[0] == doctest::Approx(5.0 + 0.9).epsilon(1e-14));
    CHECK(hold[1] == doctest::Approx(1.0 - 0.1).epsilon(1e-14));
}

TEST_CASE("wide box: the game reduces to optimal stopping, value 3") {
    RBSDEInput in = boxed_input(12.0, 10.0);
    Solution sol = solve_reflected(in);
    DynkinGame game{&in, &sol.y};

    GameValues gv = game_values(game, 1000000);
    REQUIRE(gv.lower.size() == 1);
    CHECK(gv.lower[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(gv.upper[0] == doctest::Approx(3.0).epsilon(1e-10));

    AdaptedProcess w = game_value_induction(game);
    CHECK(grid_gap(w, sol.y) <= 1e-10);

    // Started at the split the game is already decided by the data.
    GameValues mid = game_values(game, 1000000, 1);
    REQUIRE(mid.lower.size() == 2);
    CHECK(mid.lower[0] == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(mid.lower[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("one-step game between loose barriers settles at the mean") {
    SpacePtr sp = testsupport::coin_space();
    auto lower = AdaptedProcess::from_rows(sp, {{0.5, 0.5}, {-10, -10}});
    auto upper = AdaptedProcess::from_rows(sp, {{1.5, 1.5}, {10, 10}});
    RBSDEInput in = make_input(sp, {2.0, 0.0}, zero_gen(), lower, upper);
    Solution sol = solve_reflected(in);
    CHECK(sol.y.at(0, 0) == doctest::Approx(1.0).epsilon(1e-13));

    DynkinGame game{&in, &sol.y};
    GameValues gv = game_values(game, 1000);
    CHECK(gv.lower[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gv.upper[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(game_value_induction(game).at(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("binding upper barrier caps the value at 2.5") {
    RBSDEInput in = boxed_input(2.5);
    Solution sol = solve_reflected(in);
    CHECK(sol.y.at(0, 0) == doctest::Approx(2.5).epsilon(1e-13));

    DynkinGame game{&in, &sol.y};
    GameValues gv = game_values(game, 1000000);
    CHECK(gv.lower[0] == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(gv.upper[0] == doctest::Approx(2.5).epsilon(1e-10));

    AdaptedProcess w = game_value_induction(game);
    CHECK(grid_gap(w, sol.y) <= 1e-10);

    GameValues ref = game_values_reference(game, 1000000);
    CHECK(std::abs(gv.lower[0] - ref.lower[0]) <= 1e-12);
    CHECK(std::abs(gv.upper[0] - ref.upper[0]) <= 1e-12);
}

TEST_CASE("raising either barrier never lowers the value") {
    double previous = -1e300;
    for (double u0 : {2.2, 2.5, 2.8, 100.0}) {
        RBSDEInput in = boxed_input(u0);
        Solution sol = solve_reflected(in);
        DynkinGame game{&in, &sol.y};
        double v = game_value_induction(game).at(0, 0);
        CHECK(v >= previous - 1e-12);
        previous = v;
    }
    CHECK(previous == doctest::Approx(3.0).epsilon(1e-12));

    previous = -1e300;
    for (double l0 : {2.0, 2.7, 3.5}) {
        RBSDEInput in = boxed_input(100.0, 6.0, l0);
        Solution sol = solve_reflected(in);
        DynkinGame game{&in, &sol.y};
        double v = game_value_induction(game).at(0, 0);
        CHECK(v >= previous - 1e-12);
        previous = v;
    }
    CHECK(previous == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("pair enumeration respects its budget") {
    RBSDEInput in = boxed_input(12.0, 10.0);
    Solution sol = solve_reflected(in);
    DynkinGame game{&in, &sol.y};
    CHECK_THROWS_AS(game_values(game, 3), CountExceeded);
}

TEST_CASE("games require both barriers and a z-free driver") {
    SpacePtr sp = counterexample_space();
    auto lower = AdaptedProcess::from_rows(sp, {{2, 2}, {0, 0}, {0, 0}});
    RBSDEInput one_sided = make_input(sp, {5.0, 1.0}, zero_gen(), lower);
    Solution sol = solve_reflected(one_sided);
    DynkinGame bad{&one_sided, &sol.y};
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    Generator zdep;
    zdep.name = "z-tilt";
    zdep.eval = [](int, int, double, std::span<const double> z) {
        return z.empty() ? 0.0 : 0.1 * z[0];
    };
    zdep.depends_on_z = true;
    zdep.lambda = 0.1;
    auto upper = AdaptedProcess::from_rows(sp, {{12, 12}, {10, 10}, {10, 10}});
    RBSDEInput zin = make_input(sp, {5.0, 1.0}, zdep, lower, upper);
    Solution zsol = solve_reflected(zin);
    DynkinGame zgame{&zin, &zsol.y};
    CHECK_THROWS_AS(zgame.validate(), ValidationError);
}
