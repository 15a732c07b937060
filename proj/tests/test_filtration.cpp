#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "rbsde/filtration.hpp"
#include "rbsde/random_instances.hpp"
#include "rbsde/scenario.hpp"
#include "support.hpp"

using namespace rbsde;
using testsupport::six_outcome_space;
using testsupport::single_path_space;

namespace {

// Independent product recursion for the number of stopping times on the
// subtree rooted at (k, a): stop now, or pick one continuation per child.
std::uint64_t count_by_hand(const FilteredSpace& sp, int k, int a) {
    if (k == sp.steps()) return 1;
    std::uint64_t prod = 1;
    for (int c : sp.atom(k, a).children) prod *= count_by_hand(sp, k + 1, c);
    return prod + 1;
}

}  // namespace

TEST_CASE("conditional expectation of a constant is the constant") {
    SpacePtr sp = six_outcome_space();
    std::vector<double> x(6, 3.7);
    for (int k = 0; k <= sp->steps(); ++k) {
        auto c = sp->cond_expect(x, k);
        for (double v : c) CHECK(v == doctest::Approx(3.7).epsilon(1e-15));
    }
}

TEST_CASE("conditional expectation is the probability-weighted atom average") {
    SpacePtr sp = six_outcome_space();
    std::vector<double> x{1, 2, 3, 4, 5, 6};

    auto c1 = sp->cond_expect(x, 1);
    const double first = (0.10 * 1 + 0.20 * 2 + 0.15 * 3) / 0.45;
    const double second = (0.25 * 4 + 0.20 * 5 + 0.10 * 6) / 0.55;
    for (int w = 0; w < 3; ++w) CHECK(c1[w] == doctest::Approx(first).epsilon(1e-14));
    for (int w = 3; w < 6; ++w) CHECK(c1[w] == doctest::Approx(second).epsilon(1e-14));

    // Finest partition: conditioning changes nothing (up to the p/p round).
    auto c2 = sp->cond_expect(x, 2);
    for (int w = 0; w < 6; ++w) CHECK(c2[w] == doctest::Approx(x[w]).epsilon(1e-14));

    // Coarsest: plain expectation, and expect() agrees.
    auto c0 = sp->cond_expect(x, 0);
    double mean = 0.0;
    for (int w = 0; w < 6; ++w) mean += sp->prob(w) * x[w];
    for (int w = 0; w < 6; ++w) CHECK(c0[w] == doctest::Approx(mean).epsilon(1e-14));
    CHECK(sp->expect(x) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("two-outcome scenario: expectation of the terminal value is 3") {
    SpacePtr sp = counterexample_space();
    std::vector<double> xi{5.0, 1.0};
    CHECK(sp->expect(xi) == 3.0);
    auto c0 = sp->cond_expect(xi, 0);
    CHECK(c0[0] == 3.0);
    CHECK(c0[1] == 3.0);
    // Absolute value changes nothing here: E|xi| = 3 as well.
    std::vector<double> axi{std::abs(5.0), std::abs(1.0)};
    CHECK(sp->expect(axi) == 3.0);
}

TEST_CASE("tower property on random trees") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        SpacePtr sp = random_tree_space(seed, {4, 1, 3, true});
        Rng rng(Rng::derive(seed, 9));
        std::vector<double> x(sp->outcome_count());
        for (double& v : x) v = rng.uniform(-5.0, 5.0);
        for (int k = 0; k + 1 <= sp->steps(); ++k) {
            auto inner = sp->cond_expect(x, k + 1);
            auto lhs = sp->cond_expect(inner, k);
            auto rhs = sp->cond_expect(x, k);
            for (int w = 0; w < sp->outcome_count(); ++w)
                CHECK(lhs[w] == doctest::Approx(rhs[w]).epsilon(1e-12));
            CHECK(sp->constant_on(rhs, k));
        }
    }
}

TEST_CASE("predictable projection of a martingale shifts the index back") {
    SpacePtr sp = random_tree_space(21, {4, 2, 3, false});
    Rng rng(Rng::derive(21, 1));
    AdaptedProcess m = random_martingale(sp, rng);
    PredictableProcess pm = predictable_projection(m);
    CHECK(pm.at(0, 0) == m.at(0, 0));
    for (int k = 1; k <= sp->steps(); ++k)
        for (int w = 0; w < sp->outcome_count(); ++w)
            CHECK(pm.at(k, w) == doctest::Approx(m.at(k - 1, w)).epsilon(1e-12));
    pm.validate();
}

TEST_CASE("predictable projection of a deterministic process is itself") {
    SpacePtr sp = single_path_space({0.0, 1.0, 2.0});
    auto x = AdaptedProcess::from_rows(sp, {{4.0}, {-1.0}, {7.0}});
    PredictableProcess px = predictable_projection(x);
    for (int k = 0; k <= 2; ++k) CHECK(px.at(k, 0) == doctest::Approx(x.at(k, 0)).epsilon(1e-15));
}

TEST_CASE("two-outcome scenario: projected envelope value at step 1 is 3") {
    SpacePtr sp = counterexample_space();
    auto y = AdaptedProcess::from_rows(sp, {{3, 3}, {5, 1}, {5, 1}});
    PredictableProcess py = predictable_projection(y);
    CHECK(py.at(1, 0) == 3.0);
    CHECK(py.at(1, 1) == 3.0);
}

TEST_CASE("dual projection fixes predictable processes and kills fair increments") {
    SpacePtr sp = counterexample_space();

    // Already predictable: projection is the identity.
    auto a = AdaptedProcess::from_rows(sp, {{0, 0}, {2, 2}, {3, 1}});
    PredictableProcess ap = dual_predictable_projection(a);
    for (int k = 0; k <= 2; ++k)
        for (int w = 0; w < 2; ++w)
            CHECK(ap.at(k, w) == doctest::Approx(a.at(k, w)).epsilon(1e-14));

    // Compensated coin: the increment has zero conditional mean.
    auto coin = AdaptedProcess::from_rows(sp, {{0, 0}, {1, -1}, {1, -1}});
    PredictableProcess cp = dual_predictable_projection(coin);
    for (int k = 0; k <= 2; ++k)
        for (int w = 0; w < 2; ++w) CHECK(cp.at(k, w) == 0.0);
}

TEST_CASE("dual projection preserves the terminal expectation") {
    for (std::uint64_t seed : {31u, 32u}) {
        SpacePtr sp = random_tree_space(seed, {5, 1, 3, true});
        Rng rng(Rng::derive(seed, 2));
        AdaptedProcess a = random_drift(sp, rng, 0.7);
        PredictableProcess ap = dual_predictable_projection(a);
        ap.validate();
        std::vector<double> an(sp->outcome_count()), apn(sp->outcome_count());
        for (int w = 0; w < sp->outcome_count(); ++w) {
            an[w] = a.at(sp->steps(), w);
            apn[w] = ap.at(sp->steps(), w);
        }
        CHECK(sp->expect(an) == doctest::Approx(sp->expect(apn)).epsilon(1e-12));
    }
}

TEST_CASE("stopping time counts follow the product recursion") {
    // One step, trivial initial sigma-field: stop now or at the end.
    CHECK(stopping_time_count(*binomial_space(1), 0, 1000) == 2);

    // The two-outcome scenario has exactly five stopping times.
    CHECK(stopping_time_count(*counterexample_space(), 0, 1000) == 5);

    // Two-step binomial: 1 + (1 + 1)*(1 + 1) = 5.
    SpacePtr b2 = binomial_space(2);
    CHECK(stopping_time_count(*b2, 0, 1000) == count_by_hand(*b2, 0, 0));

    // Random tree against the same recursion.
    SpacePtr sp = random_tree_space(44, {3, 1, 3, false});
    CHECK(stopping_time_count(*sp, 0, std::uint64_t{1} << 62) == count_by_hand(*sp, 0, 0));

    // Saturation: the count caps out just above the budget instead of
    // overflowing; callers only ever test "> cap".
    SpacePtr b4 = binomial_space(4);
    CHECK(stopping_time_count(*b4, 0, 1u << 30) == 677);
    std::uint64_t capped = stopping_time_count(*b4, 0, 10);
    CHECK(capped > 10);
    CHECK(capped <= 677);
}

TEST_CASE("enumeration is exhaustive, valid and duplicate-free") {
    SpacePtr sp = counterexample_space();
    auto all = enumerate_stopping_times(*sp, 100);
    CHECK(all.size() == 5);
    std::set<std::vector<int>> seen;
    for (const StoppingTime& st : all) {
        st.validate(*sp);
        seen.insert(st.value);
    }
    CHECK(seen.size() == all.size());

    // Values start at `start`.
    auto tail = enumerate_stopping_times(*sp, 100, 1);
    for (const StoppingTime& st : tail)
        for (int v : st.value) CHECK(v >= 1);

    CHECK_THROWS_AS(enumerate_stopping_times(*binomial_space(2), 3), CountExceeded);
}

TEST_CASE("non-adapted stopping rules are rejected") {
    SpacePtr sp = counterexample_space();
    // {tau = 0} = {w1} is not a union of atoms of the trivial field.
    StoppingTime bad{{0, 1}};
    CHECK_THROWS_AS(bad.validate(*sp), ValidationError);
    StoppingTime good{{1, 2}};
    good.validate(*sp);  // split is revealed at step 1
}

TEST_CASE("space construction rejects structural defects") {
    // Probabilities must sum to one.
    CHECK_THROWS_AS(FilteredSpace::create({{"a", 0.4}, {"b", 0.4}}, {0.0, 1.0},
                                          {{{0, 1}}, {{0}, {1}}}),
                    ValidationError);
    // Partitions must refine.
    CHECK_THROWS_AS(FilteredSpace::create({{"a", 0.5}, {"b", 0.5}}, {0.0, 1.0},
                                          {{{0}, {1}}, {{0, 1}}}),
                    ValidationError);
    // Time grid must increase strictly.
    CHECK_THROWS_AS(FilteredSpace::create({{"a", 0.5}, {"b", 0.5}}, {0.0, 0.0},
                                          {{{0, 1}}, {{0}, {1}}}),
                    ValidationError);
}
