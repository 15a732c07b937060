#include <cmath>
#include <vector>

#include "doctest.h"
#include "rbsde/martingale_basis.hpp"
#include "rbsde/random_instances.hpp"
#include "rbsde/scenario.hpp"
#include "support.hpp"

using namespace rbsde;

TEST_CASE("one-step binomial basis: known increment and bracket") {
    const double p = 0.3;
    SpacePtr sp = binomial_space(1, p);  // outcome 0 = "d" (0.7), outcome 1 = "u" (0.3)
    MartingaleBasis basis = MartingaleBasis::build(sp);
    CHECK(basis.dim() == 1);

    const auto& blk = basis.block(0, 0);
    REQUIRE(blk.dim == 1);
    // Centered indicator difference: -2p on the down child, 2(1-p) up.
    CHECK(blk.incr[0][0] == doctest::Approx(-2.0 * p).epsilon(1e-14));
    CHECK(blk.incr[0][1] == doctest::Approx(2.0 * (1.0 - p)).epsilon(1e-14));
    CHECK(blk.bracket[0] == doctest::Approx(4.0 * p * (1.0 - p)).epsilon(1e-14));
    CHECK(blk.density[0] == doctest::Approx(blk.bracket[0] / sp->dt(0)).epsilon(1e-14));

    AdaptedProcess el = basis.element(1);
    CHECK(el.at(0, 0) == 0.0);
    CHECK(el.at(1, 0) == doctest::Approx(-2.0 * p).epsilon(1e-14));
    CHECK(el.at(1, 1) == doctest::Approx(2.0 * (1.0 - p)).epsilon(1e-14));
    CHECK(martingale_defect(el) <= 1e-14);
}

TEST_CASE("one-step trinomial basis: two orthogonal directions") {
    SpacePtr sp = trinomial_space(1, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
    MartingaleBasis basis = MartingaleBasis::build(sp);
    CHECK(basis.dim() == 2);

    const auto& blk = basis.block(0, 0);
    REQUIRE(blk.dim == 2);
    double mean1 = 0.0, mean2 = 0.0, cross = 0.0;
    for (int j = 0; j < 3; ++j) {
        mean1 += blk.incr[0][j] / 3.0;
        mean2 += blk.incr[1][j] / 3.0;
        cross += blk.incr[0][j] * blk.incr[1][j] / 3.0;
    }
    CHECK(std::abs(mean1) <= 1e-14);
    CHECK(std::abs(mean2) <= 1e-14);
    CHECK(std::abs(cross) <= 1e-14);
    CHECK(blk.bracket[0] > 0.0);
    CHECK(blk.bracket[1] > 0.0);
}

TEST_CASE("two-outcome scenario: one direction at the split, none afterwards") {
    SpacePtr sp = counterexample_space();
    MartingaleBasis basis = MartingaleBasis::build(sp);
    CHECK(basis.dim() == 1);
    CHECK(basis.block(0, 0).dim == 1);
    CHECK(basis.block(1, 0).dim == 0);
    CHECK(basis.block(1, 1).dim == 0);

    // After the split nothing moves: the element is flat on (1, 2].
    AdaptedProcess el = basis.element(1);
    for (int w = 0; w < 2; ++w) CHECK(el.at(2, w) == el.at(1, w));
}

TEST_CASE("representing a basis element gives unit coefficients") {
    SpacePtr sp = random_tree_space(91, {3, 2, 4, true});
    MartingaleBasis basis = MartingaleBasis::build(sp);
    REQUIRE(basis.dim() >= 1);

    for (int j = 1; j <= basis.dim(); ++j) {
        ZCoefficients z = represent(basis, basis.element(j));
        for (int k = 0; k < sp->steps(); ++k)
            for (int a = 0; a < sp->atom_count(k); ++a) {
                const auto& blk = basis.block(k, a);
                auto zk = z.at(k, a);
                for (int i = 0; i < basis.dim(); ++i) {
                    double expected = (i == j - 1 && i < blk.dim) ? 1.0 : 0.0;
                    CHECK(zk[i] == doctest::Approx(expected).epsilon(1e-10));
                }
            }
    }
}

TEST_CASE("representing the zero martingale gives zero coefficients") {
    SpacePtr sp = random_tree_space(92, {3, 1, 3, false});
    MartingaleBasis basis = MartingaleBasis::build(sp);
    AdaptedProcess zero(sp);
    ZCoefficients z = represent(basis, zero);
    for (int k = 0; k < sp->steps(); ++k)
        for (int a = 0; a < sp->atom_count(k); ++a)
            for (double v : z.at(k, a)) CHECK(v == 0.0);
}

TEST_CASE("representation reconstructs every martingale increment") {
    for (std::uint64_t seed : {101u, 102u, 103u}) {
        SpacePtr sp = random_tree_space(seed, {4, 1, 4, true});
        MartingaleBasis basis = MartingaleBasis::build(sp);
        Rng rng(Rng::derive(seed, 8));
        AdaptedProcess m = random_martingale(sp, rng, 1.5);
        ZCoefficients z = represent(basis, m);

        for (int k = 0; k < sp->steps(); ++k)
            for (int a = 0; a < sp->atom_count(k); ++a) {
                const auto& atom = sp->atom(k, a);
                const auto& blk = basis.block(k, a);
                auto zk = z.at(k, a);
                for (std::size_t j = 0; j < atom.children.size(); ++j) {
                    int w = sp->atom(k + 1, atom.children[j]).members.front();
                    double dm = m.at(k + 1, w) - m.at(k, w);
                    double rebuilt = 0.0;
                    for (int i = 0; i < blk.dim; ++i) rebuilt += zk[i] * blk.incr[i][j];
                    CHECK(rebuilt == doctest::Approx(dm).epsilon(1e-10));
                }
            }
    }
}

TEST_CASE("represent rejects non-martingales") {
    SpacePtr sp = random_tree_space(93, {3, 2, 3, false});
    MartingaleBasis basis = MartingaleBasis::build(sp);
    Rng rng(Rng::derive(93, 9));
    AdaptedProcess x = random_adapted(sp, rng);
    CHECK_THROWS_AS(represent(basis, x), NotMartingale);
}

TEST_CASE("state norm: pinned value, homogeneity, bracket identity") {
    const double p = 0.3;
    SpacePtr sp = binomial_space(1, p);
    MartingaleBasis basis = MartingaleBasis::build(sp);
    std::vector<double> unit{1.0};
    CHECK(m_norm(basis, 0, 0, unit) ==
          doctest::Approx(std::sqrt(4.0 * p * (1.0 - p))).epsilon(1e-14));
    std::vector<double> zero{0.0};
    CHECK(m_norm(basis, 0, 0, zero) == 0.0);

    // Degree-one homogeneity on a richer space.
    SpacePtr tree = random_tree_space(94, {3, 2, 4, false});
    MartingaleBasis tb = MartingaleBasis::build(tree);
    Rng rng(Rng::derive(94, 10));
    std::vector<double> z(tb.dim()), z2(tb.dim());
    for (int i = 0; i < tb.dim(); ++i) {
        z[i] = rng.uniform(-2.0, 2.0);
        z2[i] = 2.0 * z[i];
    }
    for (int a = 0; a < tree->atom_count(1); ++a)
        CHECK(m_norm(tb, 1, a, z2) == doctest::Approx(2.0 * m_norm(tb, 1, a, z)).epsilon(1e-14));
}

TEST_CASE("integrated norm on the symmetric two-step binomial") {
    SpacePtr sp = binomial_space(2, 0.5);
    MartingaleBasis basis = MartingaleBasis::build(sp);
    ZCoefficients z = represent(basis, basis.element(1));

    // Unit coefficients, bracket 1 per step: the pathwise integral is 2.
    CHECK(mp_norm(basis, z, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(mp_norm(basis, z, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    // Degree-p homogeneity.
    ZCoefficients z3(basis);
    for (int k = 0; k < sp->steps(); ++k)
        for (int a = 0; a < sp->atom_count(k); ++a) {
            auto src = z.at(k, a);
            auto dst = z3.at(k, a);
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 3.0 * src[i];
        }
    CHECK(mp_norm(basis, z3, 1.5) ==
          doctest::Approx(std::pow(3.0, 1.5) * mp_norm(basis, z, 1.5)).epsilon(1e-13));

    CHECK_THROWS_AS(mp_norm(basis, z, 3.0), ValidationError);
    CHECK_THROWS_AS(mp_norm(basis, z, 0.0), ValidationError);
}
