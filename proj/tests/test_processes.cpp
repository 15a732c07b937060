#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rbsde/process.hpp"
#include "rbsde/random_instances.hpp"
#include "rbsde/scenario.hpp"
#include "support.hpp"

using namespace rbsde;
using testsupport::single_path_space;

namespace {

// Random predictable nondecreasing process with R_0 = 0: increments drawn
// per atom of the previous level, accumulated along outcomes.
PredictableProcess random_increasing_predictable(SpacePtr sp, Rng& rng, double scale) {
    std::vector<std::vector<double>> rows(sp->steps() + 1,
                                          std::vector<double>(sp->outcome_count(), 0.0));
    for (int k = 1; k <= sp->steps(); ++k) {
        std::vector<double> incr(sp->atom_count(k - 1));
        for (double& v : incr) v = rng.uniform(0.0, scale);
        for (int w = 0; w < sp->outcome_count(); ++w)
            rows[k][w] = rows[k - 1][w] + incr[sp->atom_of(k - 1, w)];
    }
    return PredictableProcess::from_rows(sp, std::move(rows));
}

// Same construction with signed increments.
PredictableProcess random_signed_predictable(SpacePtr sp, Rng& rng, double scale) {
    std::vector<std::vector<double>> rows(sp->steps() + 1,
                                          std::vector<double>(sp->outcome_count(), 0.0));
    for (int k = 1; k <= sp->steps(); ++k) {
        std::vector<double> incr(sp->atom_count(k - 1));
        for (double& v : incr) v = rng.uniform(-scale, scale);
        for (int w = 0; w < sp->outcome_count(); ++w)
            rows[k][w] = rows[k - 1][w] + incr[sp->atom_of(k - 1, w)];
    }
    return PredictableProcess::from_rows(sp, std::move(rows));
}

}  // namespace

TEST_CASE("from_rows rejects non-measurable matrices") {
    SpacePtr sp = counterexample_space();
    // Row 0 must be constant on the trivial field.
    CHECK_THROWS_AS(AdaptedProcess::from_rows(sp, {{1, 2}, {0, 0}, {0, 0}}), ValidationError);
    // Row 1 of a predictable process must be constant on the step-0 field.
    CHECK_THROWS_AS(PredictableProcess::from_rows(sp, {{0, 0}, {1, 2}, {0, 0}}),
                    ValidationError);
    // Shape mismatch.
    CHECK_THROWS_AS(AdaptedProcess::from_rows(sp, {{0, 0}, {0, 0}}), ValidationError);
    // The same matrix is fine as an adapted process.
    auto ok = AdaptedProcess::from_rows(sp, {{0, 0}, {1, 2}, {1, 2}});
    ok.validate();
}

TEST_CASE("doob decomposition of a martingale has zero compensator") {
    SpacePtr sp = random_tree_space(7, {4, 2, 3, true});
    Rng rng(Rng::derive(7, 3));
    AdaptedProcess m = random_martingale(sp, rng, 2.0);
    DoobDecomposition d = doob_decomposition(m);
    for (int k = 0; k <= sp->steps(); ++k)
        for (int w = 0; w < sp->outcome_count(); ++w) {
            CHECK(std::abs(d.compensator.at(k, w)) <= 1e-12);
            CHECK(d.martingale.at(k, w) ==
                  doctest::Approx(m.at(k, w) - m.at(0, w)).epsilon(1e-12));
        }
}

TEST_CASE("doob decomposition of a deterministic decreasing path") {
    SpacePtr sp = single_path_space({0.0, 1.0, 2.0});
    auto s = AdaptedProcess::from_rows(sp, {{5.0}, {4.0}, {1.0}});
    DoobDecomposition d = doob_decomposition(s);
    CHECK(d.martingale.at(0, 0) == 0.0);
    CHECK(d.martingale.at(1, 0) == 0.0);
    CHECK(d.martingale.at(2, 0) == 0.0);
    CHECK(d.compensator.at(0, 0) == 0.0);
    CHECK(d.compensator.at(1, 0) == 1.0);
    CHECK(d.compensator.at(2, 0) == 4.0);
}

TEST_CASE("two-outcome scenario: the envelope is a martingale, so K vanishes") {
    SpacePtr sp = counterexample_space();
    auto y = AdaptedProcess::from_rows(sp, {{3, 3}, {5, 1}, {5, 1}});
    DoobDecomposition d = doob_decomposition(y);
    std::vector<double> kn(2);
    for (int w = 0; w < 2; ++w) {
        kn[w] = d.compensator.at(2, w);
        for (int k = 0; k <= 2; ++k) CHECK(d.compensator.at(k, w) == 0.0);
    }
    CHECK(sp->expect(kn) == 0.0);
}

TEST_CASE("doob decomposition reconstructs random supermartingales") {
    for (std::uint64_t seed : {51u, 52u, 53u}) {
        SpacePtr sp = random_tree_space(seed, {5, 1, 3, true});
        Rng rng(Rng::derive(seed, 4));
        AdaptedProcess s = random_supermartingale(sp, rng, 1.5);
        DoobDecomposition d = doob_decomposition(s);
        d.compensator.validate();
        CHECK(martingale_defect(d.martingale) <= 1e-12);
        for (int w = 0; w < sp->outcome_count(); ++w) {
            CHECK(d.compensator.at(0, w) == 0.0);
            CHECK(d.martingale.at(0, w) == 0.0);
            for (int k = 0; k <= sp->steps(); ++k) {
                double rebuilt = s.at(0, w) - d.compensator.at(k, w) + d.martingale.at(k, w);
                CHECK(rebuilt == doctest::Approx(s.at(k, w)).epsilon(1e-12));
                if (k > 0)
                    CHECK(d.compensator.at(k, w) - d.compensator.at(k - 1, w) >= -1e-15);
            }
        }
    }
}

TEST_CASE("doob decomposition rejects submartingales") {
    SpacePtr sp = single_path_space({0.0, 1.0});
    auto s = AdaptedProcess::from_rows(sp, {{0.0}, {1.0}});
    CHECK_THROWS_AS(doob_decomposition(s), NotSupermartingale);
}

TEST_CASE("jordan split of monotone and mixed paths") {
    SpacePtr sp = single_path_space({0.0, 1.0, 2.0});

    auto up = PredictableProcess::from_rows(sp, {{0.0}, {1.0}, {3.0}});
    FVDecomposition dup = jordan_split(up);
    for (int k = 0; k <= 2; ++k) {
        CHECK(dup.plus.at(k, 0) == up.at(k, 0));
        CHECK(dup.minus.at(k, 0) == 0.0);
    }

    // Increments +2 then -1.
    auto mixed = PredictableProcess::from_rows(sp, {{0.0}, {2.0}, {1.0}});
    FVDecomposition dm = jordan_split(mixed);
    CHECK(dm.plus.at(1, 0) == 2.0);
    CHECK(dm.plus.at(2, 0) == 2.0);
    CHECK(dm.minus.at(1, 0) == 0.0);
    CHECK(dm.minus.at(2, 0) == 1.0);
}

TEST_CASE("jordan split is the minimal one: variation identity and singular steps") {
    SpacePtr sp = random_tree_space(61, {4, 2, 3, false});
    Rng rng(Rng::derive(61, 5));
    PredictableProcess r = random_signed_predictable(sp, rng, 1.0);
    FVDecomposition d = jordan_split(r);
    d.plus.validate();
    d.minus.validate();
    for (int w = 0; w < sp->outcome_count(); ++w) {
        double var = 0.0;
        for (int k = 1; k <= sp->steps(); ++k) {
            double dp = d.plus.at(k, w) - d.plus.at(k - 1, w);
            double dq = d.minus.at(k, w) - d.minus.at(k - 1, w);
            CHECK(dp >= 0.0);
            CHECK(dq >= 0.0);
            CHECK(std::min(dp, dq) == 0.0);  // never both active
            var += std::abs(r.at(k, w) - r.at(k - 1, w));
            CHECK(d.plus.at(k, w) - d.minus.at(k, w) ==
                  doctest::Approx(r.at(k, w) - r.at(0, w)).epsilon(1e-12));
        }
        // Total variation = plus_N + minus_N, which no other split can beat.
        CHECK(d.plus.at(sp->steps(), w) + d.minus.at(sp->steps(), w) ==
              doctest::Approx(var).epsilon(1e-12));
    }
}

TEST_CASE("quadratic variation of constants and single jumps") {
    SpacePtr sp = single_path_space({0.0, 1.0});
    auto flat = AdaptedProcess::from_rows(sp, {{2.5}, {2.5}});
    CHECK(quadratic_variation(flat).at(1, 0) == 0.0);

    auto jump = AdaptedProcess::from_rows(sp, {{0.0}, {2.0}});
    CHECK(quadratic_variation(jump).at(1, 0) == 4.0);
}

TEST_CASE("a predictable drift adds energy: E[M+K]_N >= E[M]_N") {
    SpacePtr sp = random_tree_space(71, {4, 1, 3, true});
    Rng rng(Rng::derive(71, 6));
    AdaptedProcess m = random_martingale(sp, rng);
    PredictableProcess k = random_increasing_predictable(sp, rng, 0.4);
    AdaptedProcess y(sp);
    for (int s = 0; s <= sp->steps(); ++s)
        for (int w = 0; w < sp->outcome_count(); ++w) y.at(s, w) = m.at(s, w) + k.at(s, w);

    auto qm = quadratic_variation(m);
    auto qy = quadratic_variation(y);
    std::vector<double> bm(sp->outcome_count()), by(sp->outcome_count());
    for (int w = 0; w < sp->outcome_count(); ++w) {
        bm[w] = qm.at(sp->steps(), w);
        by[w] = qy.at(sp->steps(), w);
    }
    CHECK(sp->expect(by) >= sp->expect(bm) - 1e-12);
}

TEST_CASE("path norms of flat and one-step processes") {
    SpacePtr sp = single_path_space({0.0, 1.0, 2.0});
    auto flat = AdaptedProcess::from_rows(sp, {{-1.5}, {-1.5}, {-1.5}});
    PathNorms n = path_norms(flat, 1.7);
    CHECK(n.sup_p == doctest::Approx(std::pow(1.5, 1.7)).epsilon(1e-14));
    CHECK(n.var_p == 0.0);
    CHECK(n.bracket_p == 0.0);

    // X_0 = 0, X_1 = xi on a two-outcome coin at p = 1: every norm is
    // E|xi| = 3.
    SpacePtr one = testsupport::coin_space();
    auto x = AdaptedProcess::from_rows(one, {{0, 0}, {5, 1}});
    PathNorms p1 = path_norms(x, 1.0);
    CHECK(p1.sup_p == 3.0);
    CHECK(p1.var_p == 3.0);
    CHECK(p1.bracket_p == 3.0);
}

TEST_CASE("path norms match a brute-force evaluation at p = 2") {
    SpacePtr sp = random_tree_space(81, {4, 1, 3, true});
    Rng rng(Rng::derive(81, 7));
    AdaptedProcess x = random_adapted(sp, rng, 2.0);
    PathNorms n = path_norms(x, 2.0);

    double sup = 0.0, var = 0.0, bra = 0.0;
    for (int w = 0; w < sp->outcome_count(); ++w) {
        double s = 0.0, v = 0.0, b = 0.0;
        for (int k = 0; k <= sp->steps(); ++k) {
            s = std::max(s, std::abs(x.at(k, w)));
            if (k > 0) {
                double d = x.at(k, w) - x.at(k - 1, w);
                v += std::abs(d);
                b += d * d;
            }
        }
        sup += sp->prob(w) * s * s;
        var += sp->prob(w) * v * v;
        bra += sp->prob(w) * b;  // ([X]_N)^{2/2}
    }
    CHECK(n.sup_p == doctest::Approx(sup).epsilon(1e-12));
    CHECK(n.var_p == doctest::Approx(var).epsilon(1e-12));
    CHECK(n.bracket_p == doctest::Approx(bra).epsilon(1e-12));
}
