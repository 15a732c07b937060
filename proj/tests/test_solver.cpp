#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rbsde/io.hpp"
#include "rbsde/random_instances.hpp"
#include "rbsde/scenario.hpp"
#include "rbsde/snell.hpp"
#include "rbsde/solver.hpp"
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

Generator linear_gen(double a, double b) {
    Generator g;
    g.name = "linear-y";
    g.eval = [a, b](int, int, double y, std::span<const double>) { return a - b * y; };
    g.mu = -b;
    g.growth = std::abs(a);
    return g;
}

RBSDEInput scenario_counterexample_input() {
    SpacePtr sp = counterexample_space();
    auto lower = AdaptedProcess::from_rows(sp, {{2, 2}, {0, 0}, {0, 0}});
    return make_input(sp, {5.0, 1.0}, zero_gen(), lower);
}

}  // namespace

TEST_CASE("implicit step: identity without driver, clamps with force") {
    Generator z = zero_gen();

    ImplicitStep plain = implicit_step(z, 0, 0, 0.5, 1.7, {}, std::nullopt, std::nullopt);
    CHECK(plain.y == doctest::Approx(1.7).epsilon(1e-13));
    CHECK(plain.dr_plus == 0.0);
    CHECK(plain.dr_minus == 0.0);

    ImplicitStep lifted = implicit_step(z, 0, 0, 1.0, 0.0, {}, 1.0, std::nullopt);
    CHECK(lifted.y == 1.0);
    CHECK(lifted.dr_plus == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(lifted.dr_minus == 0.0);

    ImplicitStep capped = implicit_step(z, 0, 0, 1.0, 5.0, {}, std::nullopt, 2.0);
    CHECK(capped.y == 2.0);
    CHECK(capped.dr_minus == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(capped.dr_plus == 0.0);
}

TEST_CASE("implicit step solves the scalar equation for f(y) = -y") {
    Generator f = linear_gen(0.0, 1.0);
    // y + 0.5 y = 1  =>  y = 2/3.
    ImplicitStep st = implicit_step(f, 0, 0, 0.5, 1.0, {}, std::nullopt, std::nullopt);
    CHECK(st.y == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(st.dr_plus == 0.0);
}

TEST_CASE("driver-free one-barrier solve is the snell envelope") {
    for (std::uint64_t seed : {161u, 162u, 163u}) {
        SpacePtr sp = random_tree_space(seed, {4, 1, 3, true});
        Rng rng(Rng::derive(seed, 5));
        AdaptedProcess lower = random_adapted(sp, rng, 1.0);
        std::vector<double> xi = random_terminal(*sp, rng, 1.0);
        AdaptedProcess drift = random_drift(sp, rng, 0.3);

        RBSDEInput in = make_input(sp, xi, zero_gen(), lower, std::nullopt, drift);
        Solution sol = solve_reflected(in);

        SnellProblem pb;
        pb.reward = lower;
        pb.terminal = xi;
        pb.running = drift;
        CHECK(grid_gap(sol.y, snell_envelope(pb)) <= 1e-12);
    }
}

TEST_CASE("two-outcome scenario: value 3, no force, coefficient -2") {
    RBSDEInput in = scenario_counterexample_input();
    Solution sol = solve_reflected(in);

    CHECK(sol.y.at(0, 0) == 3.0);
    CHECK(sol.y.at(1, 0) == 5.0);
    CHECK(sol.y.at(1, 1) == 1.0);
    for (int k = 0; k <= 2; ++k)
        for (int w = 0; w < 2; ++w) {
            CHECK(sol.r_plus.at(k, w) == 0.0);
            CHECK(sol.r_minus.at(k, w) == 0.0);
        }

    // One basis direction at the split, increments (-1, +1): representing
    // dM_1 = (+2, -2) gives the coefficient -2.
    CHECK(sol.z.at(0, 0)[0] == doctest::Approx(-2.0).epsilon(1e-12));

    CHECK(solution_invariants(in, sol).worst() <= 1e-10);
}

TEST_CASE("one-step penalization: the n/(1+n) family") {
    SpacePtr sp = testsupport::coin_space();
    auto lower = AdaptedProcess::from_rows(sp, {{1, 1}, {-5, -5}});
    RBSDEInput in = make_input(sp, {1.0, -1.0}, zero_gen(), lower);

    // Reflected: Y_0 = max(1, E[xi]) = 1 with unit force.
    Solution ref = solve_reflected(in);
    CHECK(ref.y.at(0, 0) == 1.0);
    CHECK(ref.r_plus.at(1, 0) == doctest::Approx(1.0).epsilon(1e-13));

    // Penalized: y = n (1 - y) has the fixed point n / (1 + n).
    PenalizedSolution p3 = solve_penalized(in, 3.0, 0.0);
    CHECK(p3.base.y.at(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p3.lower_force.at(1, 0) == doctest::Approx(0.75).epsilon(1e-12));

    SweepReport sweep = penalization_sweep(in, {{1.0, 0.0}, {3.0, 0.0}, {7.0, 0.0}});
    REQUIRE(sweep.rows.size() == 3);
    CHECK(sweep.reference_lower_force == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sweep.rows[0].max_error == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
    CHECK(sweep.rows[1].max_error == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
    CHECK(sweep.rows[2].max_error == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
    CHECK(sweep.rows[0].lower_force_gap == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
    for (const SweepRow& row : sweep.rows) {
        CHECK(row.monotone_up);
        CHECK(row.monotone_down);
    }
}

TEST_CASE("high penalty reproduces the two-outcome scenario value") {
    RBSDEInput in = scenario_counterexample_input();
    PenalizedSolution pen = solve_penalized(in, 1e6, 0.0);
    CHECK(std::abs(pen.base.y.at(0, 0) - 3.0) <= 1e-5);
}

TEST_CASE("zero penalty equals the unreflected equation") {
    SpacePtr sp = random_tree_space(171, {4, 1, 3, false});
    Rng rng(Rng::derive(171, 6));
    AdaptedProcess lower = random_adapted(sp, rng, 0.8);
    std::vector<double> xi = random_terminal(*sp, rng, 1.0);

    RBSDEInput with_barrier = make_input(sp, xi, linear_gen(0.2, 0.5), lower);
    RBSDEInput plain = make_input(sp, xi, linear_gen(0.2, 0.5));
    PenalizedSolution pen = solve_penalized(with_barrier, 0.0, 0.0);
    Solution un = solve_reflected(plain);
    CHECK(grid_gap(pen.base.y, un.y) <= 1e-12);
}

TEST_CASE("folding the driver into the reward recovers the solve exactly") {
    InstanceOptions opt;
    opt.driver_kind = "linear-y";
    opt.require_active_lower = true;
    for (std::uint64_t seed : {181u, 182u, 183u}) {
        RBSDEInput in = random_instance(seed, opt);
        const FilteredSpace& sp = *in.space;
        Solution sol = solve_reflected(in);

        SnellProblem folded;
        folded.reward = *in.lower;
        folded.terminal = in.terminal;
        AdaptedProcess vp(in.space);
        for (int k = 0; k < sp.steps(); ++k)
            for (int w = 0; w < sp.outcome_count(); ++w) {
                int a = sp.atom_of(k, w);
                double fval = in.driver(k, w, sol.y.at(k, w), sol.z.at(k, a));
                vp.at(k + 1, w) = vp.at(k, w) + fval * sp.dt(k) +
                                  in.drift.at(k + 1, w) - in.drift.at(k, w);
            }
        folded.running = vp;
        CHECK(grid_gap(snell_envelope(folded), sol.y) <= 1e-12);
    }
}

TEST_CASE("validation rejects broken inputs") {
    SpacePtr sp = testsupport::coin_space();

    // dt * mu = 2 > 1/2: the implicit equation loses monotonicity.
    RBSDEInput fast = make_input(sp, {0.0, 0.0}, linear_gen(0.0, -2.0));
    CHECK_THROWS_AS(fast.validate(), StepSizeTooLarge);
    CHECK_THROWS_AS(solve_reflected(fast), StepSizeTooLarge);

    // Crossing barriers.
    auto lo = AdaptedProcess::from_rows(sp, {{1, 1}, {0, 0}});
    auto hi = AdaptedProcess::from_rows(sp, {{0, 0}, {1, 1}});
    RBSDEInput crossed = make_input(sp, {0.5, 0.5}, zero_gen(), lo, hi);
    CHECK_THROWS_AS(crossed.validate(), BarrierCrossing);

    // Terminal data of the wrong shape.
    RBSDEInput shape = make_input(sp, {0.0, 0.0, 0.0}, zero_gen());
    CHECK_THROWS_AS(shape.validate(), ValidationError);

    // Terminal value not measurable w.r.t. the final partition is fine here
    // (singletons); a coarser final field would reject it.  Check instead
    // that a drift with nonzero start is refused.
    AdaptedProcess bad_drift(sp, 0.0);
    bad_drift.at(0, 0) = bad_drift.at(0, 1) = 0.25;
    RBSDEInput drifted = make_input(sp, {0.0, 0.0}, zero_gen(), std::nullopt,
                                    std::nullopt, bad_drift);
    CHECK_THROWS_AS(drifted.validate(), ValidationError);
}

TEST_CASE("picard iteration without z-dependence stops after one sweep") {
    InstanceOptions opt;
    opt.driver_kind = "linear-y";
    RBSDEInput in = random_instance(191, opt);
    PicardResult pr = solve_picard(in, 1e-12, 50, 1);
    REQUIRE(pr.windows.size() == 1);
    CHECK(pr.windows[0].iterations == 1);
    CHECK(grid_gap(pr.solution.y, solve_reflected(in).y) <= 1e-14);
}

TEST_CASE("picard iteration matches the direct solve on z-dependent drivers") {
    InstanceOptions opt;
    opt.driver_kind = "z-linear";
    opt.tree.min_branch = 2;
    opt.require_active_lower = true;
    for (std::uint64_t seed : {201u, 202u}) {
        RBSDEInput in = random_instance(seed, opt);
        Solution direct = solve_reflected(in);
        PicardResult pr = solve_picard(in, 1e-12, 50, 1);
        CHECK(grid_gap(pr.solution.y, direct.y) <= 1e-9);
        CHECK(grid_gap(pr.solution.r_plus, direct.r_plus) <= 1e-9);
        CHECK(pr.max_contraction_factor < 1.0);
        for (const PicardWindow& w : pr.windows) CHECK(w.iterations <= 50);
    }
}

TEST_CASE("picard refuses to stop early when the budget is too small") {
    InstanceOptions opt;
    opt.driver_kind = "z-linear";
    opt.tree.min_branch = 2;
    RBSDEInput in = random_instance(211, opt);
    CHECK_THROWS_AS(solve_picard(in, 1e-16, 1, 1), NoConvergence);
}

TEST_CASE("parallel and serial reference solves agree") {
    InstanceOptions lower_only;
    lower_only.driver_kind = "monotone-cubic";
    lower_only.require_active_lower = true;

    InstanceOptions both;
    both.driver_kind = "linear-y";
    both.upper = true;

    for (std::uint64_t seed : {221u, 222u}) {
        for (const InstanceOptions& opt : {lower_only, both}) {
            RBSDEInput in = random_instance(seed, opt);
            Solution par = solve_reflected(in);
            Solution ser = reference::solve_reflected_serial(in);
            CHECK(grid_gap(par.y, ser.y) <= 1e-10);
            CHECK(grid_gap(par.m, ser.m) <= 1e-10);
            CHECK(grid_gap(par.r_plus, ser.r_plus) <= 1e-10);
            CHECK(grid_gap(par.r_minus, ser.r_minus) <= 1e-10);
        }
    }
}

TEST_CASE("solves satisfy the pathwise invariants") {
    InstanceOptions opt;
    opt.driver_kind = "linear-y";
    opt.upper = true;
    opt.require_active_lower = true;
    opt.require_active_upper = true;
    opt.min_force = 0.02;
    RBSDEInput in = random_instance(231, opt);
    Solution sol = solve_reflected(in);
    InvariantReport rep = solution_invariants(in, sol);
    CHECK(rep.equation_residual <= 1e-10);
    CHECK(rep.terminal_gap <= 1e-10);
    CHECK(rep.barrier_gap <= 1e-10);
    CHECK(rep.minimality_gap <= 1e-10);
    CHECK(rep.force_overlap <= 1e-10);
    CHECK(rep.martingale_gap <= 1e-10);
    CHECK(rep.reconstruction_gap <= 1e-10);
}

TEST_CASE("repeated solves produce byte-identical reports") {
    InstanceOptions opt;
    opt.driver_kind = "monotone-cubic";
    RBSDEInput in = random_instance(241, opt);
    std::string first = solution_csv(in, solve_reflected(in));
    std::string second = solution_csv(in, solve_reflected(in));
    CHECK(first == second);
    CHECK(!first.empty());
}
