#include <cmath>
#include <vector>

#include "rbsde/solver.hpp"
#include "rbsde/tolerances.hpp"

namespace rbsde::reference {

namespace {

/// Bracket by interval doubling, then plain bisection down to float
/// resolution.  Deliberately the dumbest correct scalar solve: this file is
/// the cross-check for the production kernel, so it shares no code with it.
template <typename G>
double bisect(const G& g, double c) {
    double lo = c;
    double width = 1.0 + 0.5 * std::abs(c);
    for (int guard = 0; g(lo) > c; ++guard) {
        if (guard >= 200) throw RootBracketFailure("reference solve: no lower bracket");
        lo -= width;
        width *= 2.0;
    }
    double hi = c;
    width = 1.0 + 0.5 * std::abs(c);
    for (int guard = 0; g(hi) < c; ++guard) {
        if (guard >= 200) throw RootBracketFailure("reference solve: no upper bracket");
        hi += width;
        width *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (g(mid) < c)
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(g(lo) - c) <= std::abs(g(hi) - c) ? lo : hi;
}

}  // namespace

Solution solve_reflected_serial(const RBSDEInput& input) {
    input.validate();
    const FilteredSpace& sp = *input.space;
    const MartingaleBasis& basis = *input.basis;
    const int n = sp.steps();
    const int nw = sp.outcome_count();

    Solution s;
    s.y = AdaptedProcess(input.space);
    s.z = ZCoefficients(basis);
    s.m = AdaptedProcess(input.space);
    s.r_plus = PredictableProcess(input.space);
    s.r_minus = PredictableProcess(input.space);
    s.y.row(n) = input.terminal;

    std::vector<std::vector<double>> dm(n + 1, std::vector<double>(nw, 0.0));
    std::vector<std::vector<double>> drp = dm, drm = dm;

    for (int k = n - 1; k >= 0; --k) {
        const double dt = sp.dt(k);
        std::vector<double> target(nw);
        for (int w = 0; w < nw; ++w)
            target[w] = s.y.at(k + 1, w) + input.drift.at(k + 1, w) - input.drift.at(k, w);
        const auto cond = sp.cond_expect(target, k);

        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& atom = sp.atom(k, a);
            const int w0 = atom.members.front();
            const double c = cond[w0];

            for (int w : atom.members) dm[k + 1][w] = target[w] - c;
            const auto& blk = basis.block(k, a);
            auto zk = s.z.at(k, a);
            for (int i = 0; i < blk.dim; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < atom.children.size(); ++j) {
                    const auto& child = sp.atom(k + 1, atom.children[j]);
                    acc += (child.prob / atom.prob) * dm[k + 1][child.members.front()] *
                           blk.incr[i][j];
                }
                zk[i] = blk.bracket[i] > 0.0 ? acc / blk.bracket[i] : 0.0;
            }

            const auto g = [&](double yy) {
                return yy - dt * input.driver(k, w0, yy, std::span<const double>(zk));
            };
            double y = std::abs(g(c) - c) <= tol::kRootSolve ? c : bisect(g, c);
            double force_low = 0.0, force_up = 0.0;
            if (input.lower && y < input.lower->at(k, w0)) {
                y = input.lower->at(k, w0);
                force_low = std::max(g(y) - c, 0.0);
            } else if (input.upper && y > input.upper->at(k, w0)) {
                y = input.upper->at(k, w0);
                force_up = std::max(c - g(y), 0.0);
            }
            for (int w : atom.members) {
                s.y.at(k, w) = y;
                drp[k + 1][w] = force_low;
                drm[k + 1][w] = force_up;
            }
        }
    }

    for (int k = 1; k <= n; ++k)
        for (int w = 0; w < nw; ++w) {
            s.m.at(k, w) = s.m.at(k - 1, w) + dm[k][w];
            s.r_plus.at(k, w) = s.r_plus.at(k - 1, w) + drp[k][w];
            s.r_minus.at(k, w) = s.r_minus.at(k - 1, w) + drm[k][w];
        }
    return s;
}

}  // namespace rbsde::reference
