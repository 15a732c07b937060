#include "rbsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rbsde/tolerances.hpp"

namespace rbsde {

namespace {

/// g(y) = y - dt f(y) = c by safeguarded secant/bisection.  g is strictly
/// increasing under the step-size precondition (slope >= 1 - dt mu >= 1/2),
/// so a sign change brackets the unique root.
template <typename G>
double solve_scalar(const G& g, double c) {
    double y = c;
    double gy = g(y);
    if (std::abs(gy - c) <= tol::kRootSolve) return y;

    double lo, hi, glo, ghi;
    double step = 1.0 + 0.5 * std::abs(c);
    if (gy < c) {
        lo = y;
        glo = gy;
        hi = y + step;
        ghi = g(hi);
        for (int guard = 0; ghi < c; ++guard) {
            if (guard >= 200) throw RootBracketFailure("no upper bracket for implicit step");
            lo = hi;
            glo = ghi;
            step *= 2.0;
            hi += step;
            ghi = g(hi);
        }
    } else {
        hi = y;
        ghi = gy;
        lo = y - step;
        glo = g(lo);
        for (int guard = 0; glo > c; ++guard) {
            if (guard >= 200) throw RootBracketFailure("no lower bracket for implicit step");
            hi = lo;
            ghi = glo;
            step *= 2.0;
            lo -= step;
            glo = g(lo);
        }
    }

    for (int round = 0; round < tol::kRootSolveMaxRounds; ++round) {
        // Secant proposal on even rounds, plain bisection on odd rounds so a
        // stuck endpoint cannot stall progress.
        double mid = 0.5 * (lo + hi);
        if (round % 2 == 0 && ghi > glo) {
            const double secant = lo + (c - glo) / (ghi - glo) * (hi - lo);
            if (secant > lo && secant < hi) mid = secant;
        }
        if (!(mid > lo && mid < hi)) {
            // Interval collapsed to adjacent floats; g cannot be resolved
            // further, return the endpoint with the smaller residual.
            return std::abs(glo - c) <= std::abs(ghi - c) ? lo : hi;
        }
        const double gm = g(mid);
        if (std::abs(gm - c) <= tol::kRootSolve) return mid;
        if (gm < c) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    throw RootBracketFailure("implicit step did not converge in 200 rounds");
}

struct Workspace {
    AdaptedProcess y;
    ZCoefficients z;
    // Increments on (t_{k-1}, t_k], stored at index k = 1..N.
    std::vector<std::vector<double>> dm, drp, drm;
};

Workspace make_workspace(const RBSDEInput& in) {
    Workspace ws;
    ws.y = AdaptedProcess(in.space);
    ws.z = ZCoefficients(*in.basis);
    const int rows = in.space->steps() + 1;
    const int cols = in.space->outcome_count();
    ws.dm.assign(rows, std::vector<double>(cols, 0.0));
    ws.drp.assign(rows, std::vector<double>(cols, 0.0));
    ws.drm.assign(rows, std::vector<double>(cols, 0.0));
    return ws;
}

/// Backward sweep over steps k in [k_lo, k_hi); row k_hi of ws.y holds the
/// terminal values.  `frozen` substitutes the z argument of the driver
/// (Picard mode); pen_n/pen_m fold barrier penalties into the driver and
/// clamping is skipped when `clamp` is false.
void sweep_range(const RBSDEInput& in, int k_lo, int k_hi, const ZCoefficients* frozen,
                 double pen_n, double pen_m, bool clamp, Workspace& ws) {
    const FilteredSpace& sp = *in.space;
    const MartingaleBasis& basis = *in.basis;

    const Generator* f = &in.driver;
    Generator penalized;
    if (pen_n > 0.0 || pen_m > 0.0) {
        penalized = in.driver;
        const AdaptedProcess* low = in.lower ? &*in.lower : nullptr;
        const AdaptedProcess* up = in.upper ? &*in.upper : nullptr;
        auto base = in.driver.eval;
        penalized.eval = [base, pen_n, pen_m, low, up](int k, int w, double y,
                                                       std::span<const double> z) {
            double v = base(k, w, y, z);
            if (low && pen_n > 0.0) v += pen_n * std::max(low->at(k, w) - y, 0.0);
            if (up && pen_m > 0.0) v -= pen_m * std::max(y - up->at(k, w), 0.0);
            return v;
        };
        penalized.name = in.driver.name + "+penalty";
        f = &penalized;
    }

    for (int k = k_hi - 1; k >= k_lo; --k) {
        const double dt = sp.dt(k);
        const int atoms = sp.atom_count(k);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (atoms >= 64)
#endif
        for (int a = 0; a < atoms; ++a) {
            const auto& atom = sp.atom(k, a);
            const int nch = static_cast<int>(atom.children.size());
            std::vector<double> wv(nch), cp(nch);
            double c = 0.0;
            for (int j = 0; j < nch; ++j) {
                const auto& child = sp.atom(k + 1, atom.children[j]);
                const int cw = child.members.front();
                cp[j] = child.prob / atom.prob;
                wv[j] = ws.y.at(k + 1, cw) + in.drift.at(k + 1, cw) - in.drift.at(k, cw);
                c += cp[j] * wv[j];
            }
            for (double& x : wv) x -= c;  // centered innovation = dM on child j

            const auto& blk = basis.block(k, a);
            auto zk = ws.z.at(k, a);
            for (int i = 0; i < blk.dim; ++i) {
                double acc = 0.0;
                for (int j = 0; j < nch; ++j) acc += cp[j] * wv[j] * blk.incr[i][j];
                zk[i] = blk.bracket[i] > 0.0 ? acc / blk.bracket[i] : 0.0;
            }

            const int w0 = atom.members.front();
            const std::span<const double> zarg =
                frozen ? frozen->at(k, a) : std::span<const double>(zk.data(), zk.size());
            std::optional<double> lo, up;
            if (clamp && in.lower) lo = in.lower->at(k, w0);
            if (clamp && in.upper) up = in.upper->at(k, w0);
            const ImplicitStep st = implicit_step(*f, k, w0, dt, c, zarg, lo, up);

            for (int w : atom.members) {
                ws.y.at(k, w) = st.y;
                ws.drp[k + 1][w] = st.dr_plus;
                ws.drm[k + 1][w] = st.dr_minus;
            }
            for (int j = 0; j < nch; ++j)
                for (int w : sp.atom(k + 1, atom.children[j]).members)
                    ws.dm[k + 1][w] = wv[j];
        }
    }
}

Solution assemble(const RBSDEInput& in, Workspace&& ws) {
    const FilteredSpace& sp = *in.space;
    Solution s;
    s.y = std::move(ws.y);
    s.z = std::move(ws.z);
    s.m = AdaptedProcess(in.space);
    s.r_plus = PredictableProcess(in.space);
    s.r_minus = PredictableProcess(in.space);
    for (int k = 1; k <= sp.steps(); ++k)
        for (int w = 0; w < sp.outcome_count(); ++w) {
            s.m.at(k, w) = s.m.at(k - 1, w) + ws.dm[k][w];
            s.r_plus.at(k, w) = s.r_plus.at(k - 1, w) + ws.drp[k][w];
            s.r_minus.at(k, w) = s.r_minus.at(k - 1, w) + ws.drm[k][w];
        }
    return s;
}

}  // namespace

void RBSDEInput::validate() const {
    if (!space) throw ValidationError("input has no space");
    if (!basis) throw ValidationError("input has no martingale basis");
    if (&basis->space() != space.get())
        throw ValidationError("basis built on a different space");
    if (!driver.eval) throw ValidationError("input has no driver");
    const FilteredSpace& sp = *space;
    if (static_cast<int>(terminal.size()) != sp.outcome_count())
        throw ValidationError("terminal condition has wrong outcome count");
    if (!sp.constant_on(terminal, sp.steps()))
        throw ValidationError("terminal condition not measurable at the horizon");
    drift.validate();
    for (int w = 0; w < sp.outcome_count(); ++w)
        if (drift.at(0, w) != 0.0) throw ValidationError("drift process must start at 0");
    if (lower) lower->validate();
    if (upper) upper->validate();
    if (lower && upper)
        for (int k = 0; k <= sp.steps(); ++k)
            for (int w = 0; w < sp.outcome_count(); ++w)
                if (lower->at(k, w) > upper->at(k, w)) {
                    std::ostringstream os;
                    os << "barriers cross at (step " << k << ", outcome '"
                       << sp.outcome(w).id << "'): L=" << lower->at(k, w)
                       << " > U=" << upper->at(k, w);
                    throw BarrierCrossing(os.str());
                }
    for (int k = 0; k < sp.steps(); ++k)
        if (sp.dt(k) * std::max(driver.mu, 0.0) > tol::kStepMonotone) {
            std::ostringstream os;
            os << "dt * max(mu, 0) = " << sp.dt(k) * std::max(driver.mu, 0.0)
               << " > " << tol::kStepMonotone << " at step " << k
               << ": implicit step no longer monotone";
            throw StepSizeTooLarge(os.str());
        }
}

RBSDEInput make_input(SpacePtr space, std::vector<double> terminal, Generator driver,
                      std::optional<AdaptedProcess> lower, std::optional<AdaptedProcess> upper,
                      std::optional<AdaptedProcess> drift) {
    RBSDEInput in;
    in.basis = std::make_shared<MartingaleBasis>(MartingaleBasis::build(space));
    in.space = std::move(space);
    in.terminal = std::move(terminal);
    in.drift = drift ? std::move(*drift) : AdaptedProcess(in.space);
    in.lower = std::move(lower);
    in.upper = std::move(upper);
    in.driver = std::move(driver);
    return in;
}

ImplicitStep implicit_step(const Generator& f, int k, int w, double dt, double c,
                           std::span<const double> z, std::optional<double> lower,
                           std::optional<double> upper) {
    if (dt * std::max(f.mu, 0.0) > tol::kStepMonotone)
        throw StepSizeTooLarge("dt * max(mu, 0) > 1/2 in implicit step");
    if (lower && upper && *lower > *upper)
        throw BarrierCrossing("lower barrier above upper barrier in implicit step");
    const auto g = [&](double y) { return y - dt * f(k, w, y, z); };
    ImplicitStep out;
    const double y = solve_scalar(g, c);
    if (lower && y < *lower) {
        out.y = *lower;
        out.dr_plus = std::max(g(*lower) - c, 0.0);
    } else if (upper && y > *upper) {
        out.y = *upper;
        out.dr_minus = std::max(c - g(*upper), 0.0);
    } else {
        out.y = y;
    }
    return out;
}

Solution solve_reflected(const RBSDEInput& input) {
    input.validate();
    Workspace ws = make_workspace(input);
    ws.y.row(input.space->steps()) = input.terminal;
    sweep_range(input, 0, input.space->steps(), nullptr, 0.0, 0.0, true, ws);
    return assemble(input, std::move(ws));
}

PenalizedSolution solve_penalized(const RBSDEInput& input, double n, double m) {
    input.validate();
    if (n < 0.0 || m < 0.0) throw ValidationError("penalty intensities must be >= 0");
    if (n > 0.0 && !input.lower)
        throw ValidationError("lower penalty needs a lower barrier");
    if (m > 0.0 && !input.upper)
        throw ValidationError("upper penalty needs an upper barrier");
    const FilteredSpace& sp = *input.space;
    Workspace ws = make_workspace(input);
    ws.y.row(sp.steps()) = input.terminal;
    sweep_range(input, 0, sp.steps(), nullptr, n, m, false, ws);

    PenalizedSolution out;
    out.base = assemble(input, std::move(ws));
    out.lower_force = PredictableProcess(input.space);
    out.upper_force = PredictableProcess(input.space);
    for (int k = 0; k < sp.steps(); ++k) {
        const double dt = sp.dt(k);
        for (int w = 0; w < sp.outcome_count(); ++w) {
            const double y = out.base.y.at(k, w);
            const double dlow =
                input.lower ? n * std::max(input.lower->at(k, w) - y, 0.0) * dt : 0.0;
            const double dup =
                input.upper ? m * std::max(y - input.upper->at(k, w), 0.0) * dt : 0.0;
            out.lower_force.at(k + 1, w) = out.lower_force.at(k, w) + dlow;
            out.upper_force.at(k + 1, w) = out.upper_force.at(k, w) + dup;
        }
    }
    return out;
}

namespace {

double max_abs_diff(const AdaptedProcess& a, const AdaptedProcess& b) {
    double worst = 0.0;
    for (int k = 0; k < a.rows(); ++k)
        for (int w = 0; w < static_cast<int>(a.row(k).size()); ++w)
            worst = std::max(worst, std::abs(a.at(k, w) - b.at(k, w)));
    return worst;
}

double min_diff(const AdaptedProcess& a, const AdaptedProcess& b) {
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k < a.rows(); ++k)
        for (int w = 0; w < static_cast<int>(a.row(k).size()); ++w)
            lo = std::min(lo, a.at(k, w) - b.at(k, w));
    return lo;
}

}  // namespace

SweepReport penalization_sweep(const RBSDEInput& input,
                               const std::vector<std::pair<double, double>>& schedule) {
    const FilteredSpace& sp = *input.space;
    const Solution ref = solve_reflected(input);
    SweepReport report;
    report.reference_lower_force = sp.expect(ref.r_plus.row(sp.steps()));
    report.reference_upper_force = sp.expect(ref.r_minus.row(sp.steps()));

    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const auto [n, m] = schedule[j];
        const PenalizedSolution pen = solve_penalized(input, n, m);
        SweepRow row;
        row.n = n;
        row.m = m;
        row.max_error = max_abs_diff(pen.base.y, ref.y);
        row.lower_force_gap = std::abs(sp.expect(pen.lower_force.row(sp.steps())) -
                                       report.reference_lower_force);
        row.upper_force_gap = std::abs(sp.expect(pen.upper_force.row(sp.steps())) -
                                       report.reference_upper_force);
        if (j + 1 < schedule.size()) {
            const auto [n2, m2] = schedule[j + 1];
            // Raising the lower intensity at frozen m never lowers the value;
            // raising the upper intensity at frozen n never raises it.
            if (n2 != n) {
                const PenalizedSolution up = solve_penalized(input, n2, m);
                row.monotone_up = min_diff(up.base.y, pen.base.y) >= -tol::kInvariant;
            }
            if (m2 != m && input.upper) {
                const PenalizedSolution down = solve_penalized(input, n, m2);
                row.monotone_down = min_diff(pen.base.y, down.base.y) >= -tol::kInvariant;
            }
        }
        report.rows.push_back(row);
    }
    return report;
}

PicardResult solve_picard(const RBSDEInput& input, double tol, int max_iter, int windows) {
    input.validate();
    const FilteredSpace& sp = *input.space;
    const int n_steps = sp.steps();
    if (windows < 1 || windows > n_steps)
        throw ValidationError("window count must be in [1, steps]");

    PicardResult result;
    if (!input.driver.depends_on_z) {
        // Frozen-z and direct coincide immediately; one sweep suffices.
        result.solution = solve_reflected(input);
        result.windows.push_back(PicardWindow{0, n_steps, 1, {}, {}});
        return result;
    }

    Workspace ws = make_workspace(input);
    ws.y.row(n_steps) = input.terminal;
    result.windows.resize(windows);

    for (int j = windows - 1; j >= 0; --j) {
        const int lo = n_steps * j / windows;
        const int hi = n_steps * (j + 1) / windows;
        PicardWindow& win = result.windows[j];
        win.first_step = lo;
        win.last_step = hi;

        ZCoefficients frozen(*input.basis);  // start from z = 0
        AdaptedProcess y_prev;
        ZCoefficients z_prev;
        bool have_prev = false;
        bool converged = false;
        while (win.iterations < max_iter) {
            sweep_range(input, lo, hi, &frozen, 0.0, 0.0, true, ws);
            ++win.iterations;
            if (have_prev) {
                double dy = 0.0;
                double dz_sq = 0.0;  // E sum_k |dz|^2 d<M> over the window
                for (int k = lo; k < hi; ++k) {
                    for (int w = 0; w < sp.outcome_count(); ++w)
                        dy = std::max(dy, std::abs(ws.y.at(k, w) - y_prev.at(k, w)));
                    for (int a = 0; a < sp.atom_count(k); ++a) {
                        const auto& blk = input.basis->block(k, a);
                        const auto zc = ws.z.at(k, a);
                        const auto zp = z_prev.at(k, a);
                        double s = 0.0;
                        for (int i = 0; i < blk.dim; ++i) {
                            const double d = zc[i] - zp[i];
                            s += d * d * blk.bracket[i];
                        }
                        dz_sq += sp.atom(k, a).prob * s;
                    }
                }
                // Degree-1 metric: sup-norm on Y plus the square root of the
                // p = 2 bracket norm of the Z difference.
                const double dist = dy + std::sqrt(dz_sq);
                if (!win.distances.empty() && win.distances.back() > 1e-13)
                    win.contraction_factors.push_back(dist / win.distances.back());
                win.distances.push_back(dist);
                if (dist <= tol) {
                    converged = true;
                    break;
                }
            }
            y_prev = ws.y;
            z_prev = ws.z;
            have_prev = true;
            frozen = ws.z;
        }
        if (!converged) {
            std::ostringstream os;
            os << "Picard iteration on steps [" << lo << ", " << hi << ") did not reach "
               << tol << " in " << max_iter
               << " sweeps; shrink the window (more windows) or the step size";
            throw NoConvergence(os.str());
        }
        for (double f : win.contraction_factors)
            result.max_contraction_factor = std::max(result.max_contraction_factor, f);
    }
    result.solution = assemble(input, std::move(ws));
    return result;
}

double InvariantReport::worst() const {
    return std::max({equation_residual, terminal_gap, barrier_gap, minimality_gap,
                     force_overlap, martingale_gap, reconstruction_gap});
}

InvariantReport solution_invariants(const RBSDEInput& input, const Solution& sol) {
    const FilteredSpace& sp = *input.space;
    const MartingaleBasis& basis = *input.basis;
    InvariantReport rep;
    for (int w = 0; w < sp.outcome_count(); ++w)
        rep.terminal_gap = std::max(rep.terminal_gap,
                                    std::abs(sol.y.at(sp.steps(), w) - input.terminal[w]));

    for (int k = 0; k < sp.steps(); ++k) {
        const double dt = sp.dt(k);
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const auto& atom = sp.atom(k, a);
            const int w0 = atom.members.front();
            const double y = sol.y.at(k, w0);
            const double fval = input.driver(k, w0, y, sol.z.at(k, a));
            const double drp = sol.r_plus.at(k + 1, w0) - sol.r_plus.at(k, w0);
            const double drm = sol.r_minus.at(k + 1, w0) - sol.r_minus.at(k, w0);

            double cond_dm = 0.0;
            for (int w : atom.members) {
                const double rhs = sol.y.at(k + 1, w) + fval * dt +
                                   (input.drift.at(k + 1, w) - input.drift.at(k, w)) + drp -
                                   drm - (sol.m.at(k + 1, w) - sol.m.at(k, w));
                rep.equation_residual = std::max(rep.equation_residual, std::abs(y - rhs));
                cond_dm += sp.prob(w) * (sol.m.at(k + 1, w) - sol.m.at(k, w));
            }
            rep.martingale_gap = std::max(rep.martingale_gap, std::abs(cond_dm / atom.prob));

            if (input.lower) {
                const double l = input.lower->at(k, w0);
                rep.barrier_gap = std::max(rep.barrier_gap, l - y);
                rep.minimality_gap = std::max(rep.minimality_gap, std::abs((y - l) * drp));
            }
            if (input.upper) {
                const double u = input.upper->at(k, w0);
                rep.barrier_gap = std::max(rep.barrier_gap, y - u);
                rep.minimality_gap = std::max(rep.minimality_gap, std::abs((u - y) * drm));
            }
            rep.force_overlap = std::max(rep.force_overlap, drp * drm);

            const auto& blk = basis.block(k, a);
            const auto zk = sol.z.at(k, a);
            for (std::size_t j = 0; j < atom.children.size(); ++j) {
                const int cw = sp.atom(k + 1, atom.children[j]).members.front();
                const double dm = sol.m.at(k + 1, cw) - sol.m.at(k, cw);
                double rec = 0.0;
                for (int i = 0; i < blk.dim; ++i) rec += zk[i] * blk.incr[i][j];
                rep.reconstruction_gap = std::max(rep.reconstruction_gap, std::abs(rec - dm));
            }
        }
    }
    return rep;
}

}  // namespace rbsde
