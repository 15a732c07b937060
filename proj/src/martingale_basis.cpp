#include "rbsde/martingale_basis.hpp"

#include <cmath>
#include <string>

namespace rbsde {

namespace {

/// Conditional inner product of two child-indexed vectors on an atom:
/// sum_j P(c_j | A) u_j v_j.
double inner(std::span<const double> cond_prob, std::span<const double> u,
             std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cond_prob.size(); ++j) acc += cond_prob[j] * u[j] * v[j];
    return acc;
}

}  // namespace

MartingaleBasis MartingaleBasis::build(SpacePtr space) {
    MartingaleBasis basis;
    basis.space_ = std::move(space);
    const FilteredSpace& sp = *basis.space_;
    basis.d_star_ = std::max(sp.max_children() - 1, 0);
    basis.blocks_.resize(sp.steps());

    for (int k = 0; k < sp.steps(); ++k) {
        basis.blocks_[k].resize(sp.atom_count(k));
        const double dt = sp.dt(k);
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& atom = sp.atom(k, a);
            const int d = static_cast<int>(atom.children.size());
            AtomBlock& blk = basis.blocks_[k][a];
            blk.dim = d - 1;
            if (d <= 1) continue;

            std::vector<double> cond_prob(d);
            for (int j = 0; j < d; ++j)
                cond_prob[j] = sp.atom(k + 1, atom.children[j]).prob / atom.prob;

            blk.incr.reserve(d - 1);
            blk.bracket.reserve(d - 1);
            blk.density.reserve(d - 1);
            for (int i = 0; i < d - 1; ++i) {
                // Seed: indicator difference of consecutive children.
                std::vector<double> v(d, 0.0);
                v[i] = -1.0;
                v[i + 1] = 1.0;
                // Center to zero conditional mean.
                double mean = 0.0;
                for (int c = 0; c < d; ++c) mean += cond_prob[c] * v[c];
                for (double& x : v) x -= mean;
                // Orthogonalize against the increments built so far.
                for (int j = 0; j < i; ++j) {
                    const double coef = inner(cond_prob, v, blk.incr[j]) / blk.bracket[j];
                    for (int c = 0; c < d; ++c) v[c] -= coef * blk.incr[j][c];
                }
                const double second_moment = inner(cond_prob, v, v);
                blk.bracket.push_back(second_moment);
                blk.density.push_back(second_moment / dt);
                blk.incr.push_back(std::move(v));
            }
        }
    }
    return basis;
}

AdaptedProcess MartingaleBasis::element(int i) const {
    const FilteredSpace& sp = *space_;
    AdaptedProcess m(space_);
    for (int k = 0; k < sp.steps(); ++k) {
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& atom = sp.atom(k, a);
            const AtomBlock& blk = blocks_[k][a];
            for (std::size_t j = 0; j < atom.children.size(); ++j) {
                const double step = (i - 1 < blk.dim) ? blk.incr[i - 1][j] : 0.0;
                for (int w : sp.atom(k + 1, atom.children[j]).members)
                    m.at(k + 1, w) = m.at(k, w) + step;
            }
        }
    }
    return m;
}

ZCoefficients::ZCoefficients(const MartingaleBasis& basis) : dim_(basis.dim()) {
    const FilteredSpace& sp = basis.space();
    coeffs_.resize(sp.steps());
    for (int k = 0; k < sp.steps(); ++k)
        coeffs_[k].assign(sp.atom_count(k), std::vector<double>(dim_, 0.0));
}

ZCoefficients represent(const MartingaleBasis& basis, const AdaptedProcess& m,
                        double tolerance) {
    const FilteredSpace& sp = basis.space();
    const double defect = martingale_defect(m);
    if (defect > tolerance)
        throw NotMartingale("martingale defect " + std::to_string(defect) +
                            " exceeds tolerance");
    ZCoefficients z(basis);
    for (int k = 0; k < sp.steps(); ++k) {
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& atom = sp.atom(k, a);
            const MartingaleBasis::AtomBlock& blk = basis.block(k, a);
            if (blk.dim == 0) continue;
            const int d = static_cast<int>(atom.children.size());
            std::vector<double> dm(d), cond_prob(d);
            for (int j = 0; j < d; ++j) {
                const auto& child = sp.atom(k + 1, atom.children[j]);
                dm[j] = m.at(k + 1, child.members.front()) - m.at(k, child.members.front());
                cond_prob[j] = child.prob / atom.prob;
            }
            auto zk = z.at(k, a);
            for (int i = 0; i < blk.dim; ++i)
                zk[i] = blk.bracket[i] > 0.0 ? inner(cond_prob, dm, blk.incr[i]) / blk.bracket[i]
                                             : 0.0;
        }
    }
    return z;
}

double m_norm(const MartingaleBasis& basis, int k, int a, std::span<const double> z) {
    const MartingaleBasis::AtomBlock& blk = basis.block(k, a);
    double acc = 0.0;
    for (int i = 0; i < blk.dim && i < static_cast<int>(z.size()); ++i)
        acc += z[i] * z[i] * blk.density[i];
    return std::sqrt(acc);
}

double mp_norm(const MartingaleBasis& basis, const ZCoefficients& z, double p) {
    if (!(p > 0.0) || p > 2.0) throw ValidationError("mp_norm needs p in (0, 2]");
    const FilteredSpace& sp = basis.space();
    // sum_k |z(k)|^2 d<M>_{k+1} is adapted via the atom at step k; integrate
    // pathwise then take the p/2 moment.
    std::vector<double> path(sp.outcome_count(), 0.0);
    for (int k = 0; k < sp.steps(); ++k) {
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const MartingaleBasis::AtomBlock& blk = basis.block(k, a);
            const auto zk = z.at(k, a);
            double acc = 0.0;
            for (int i = 0; i < blk.dim; ++i) acc += zk[i] * zk[i] * blk.bracket[i];
            for (int w : sp.atom(k, a).members) path[w] += acc;
        }
    }
    double out = 0.0;
    for (int w = 0; w < sp.outcome_count(); ++w)
        out += sp.prob(w) * std::pow(path[w], p / 2.0);
    return out;
}

}  // namespace rbsde
