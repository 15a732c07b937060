#include "rbsde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "rbsde/tolerances.hpp"

namespace rbsde {

AdaptedProcess alpha_scale_process(const AdaptedProcess& x, double alpha) {
    AdaptedProcess out(x.space_ptr());
    const FilteredSpace& sp = x.space();
    for (int k = 0; k < x.rows(); ++k) {
        const double scale = std::exp(alpha * sp.time(k));
        for (int w = 0; w < sp.outcome_count(); ++w) out.at(k, w) = scale * x.at(k, w);
    }
    return out;
}

AdaptedProcess alpha_scale_drift(const AdaptedProcess& v, double alpha) {
    AdaptedProcess out(v.space_ptr());
    const FilteredSpace& sp = v.space();
    out.row(0) = v.row(0);
    for (int k = 1; k < v.rows(); ++k) {
        const double scale = std::exp(alpha * sp.time(k));
        for (int w = 0; w < sp.outcome_count(); ++w)
            out.at(k, w) = out.at(k - 1, w) + scale * (v.at(k, w) - v.at(k - 1, w));
    }
    return out;
}

Generator alpha_transform_driver(const Generator& f, const FilteredSpace& space, double alpha) {
    Generator g;
    g.name = f.name + "@alpha";
    g.mu = f.mu - alpha;
    g.lambda = f.lambda;
    g.growth = f.growth * std::exp(std::max(alpha, 0.0) * space.horizon());
    g.depends_on_z = f.depends_on_z;
    std::vector<double> times(space.times().begin(), space.times().end());
    g.eval = [base = f.eval, times = std::move(times), alpha](
                 int k, int w, double y, std::span<const double> z) {
        const double up = std::exp(alpha * times[k]);
        const double down = 1.0 / up;
        thread_local std::vector<double> zs;
        zs.assign(z.begin(), z.end());
        for (double& zi : zs) zi *= down;
        return up * base(k, w, down * y, zs) - alpha * y;
    };
    return g;
}

namespace {

double sign_hat(double y) { return y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0); }

/// Spot-check of the growth hypothesis y^ f(t,y) <= fb + mu |y| on a small
/// y-grid per (step, atom); returns a description of the worst violation.
void probe_growth_witness(const RBSDEInput& in, const Solution& sol,
                          const AdaptedProcess& f_bound) {
    const FilteredSpace& sp = *in.space;
    double y_scale = 1.0;
    for (int k = 0; k < sol.y.rows(); ++k)
        for (int w = 0; w < sp.outcome_count(); ++w)
            y_scale = std::max(y_scale, std::abs(sol.y.at(k, w)));
    const double probes[] = {0.0, 1.0, -1.0, 2.0 * y_scale, -2.0 * y_scale};
    const std::vector<double> zero_z(in.basis->dim(), 0.0);

    double worst = 0.0;
    int worst_k = -1, worst_a = -1;
    for (int k = 0; k < sp.steps(); ++k) {
        for (int a = 0; a < sp.atom_count(k); ++a) {
            const int w = sp.atom(k, a).members.front();
            for (double y : probes) {
                const double lhs = sign_hat(y) * in.driver(k, w, y, zero_z);
                const double bound = f_bound.at(k, w) + in.driver.mu * std::abs(y);
                const double slack = 1e-9 * (1.0 + std::abs(bound));
                if (lhs - bound > slack && lhs - bound > worst) {
                    worst = lhs - bound;
                    worst_k = k;
                    worst_a = a;
                }
            }
        }
    }
    if (worst_k >= 0)
        throw HypothesisUnverified("growth witness fails at step " + std::to_string(worst_k) +
                                   ", atom " + std::to_string(worst_a) + " by " +
                                   std::to_string(worst));
}

void check_estimate_preconditions(const RBSDEInput& in, double p, double alpha) {
    if (!(p > 1.0 && p <= 2.0)) throw ValidationError("estimate exponent p must lie in (1, 2]");
    const double floor =
        in.driver.depends_on_z ? in.driver.mu + in.driver.lambda * in.driver.lambda
                               : in.driver.mu;
    if (alpha < floor - 1e-12)
        throw ValidationError("alpha below the admissible scaling floor " + std::to_string(floor));
}

/// E (sum over data columns)^p pieces shared by the two report builders.
struct DataNorms {
    double terminal = 0.0;
    double drift = 0.0;
    double driver = 0.0;
    double total() const { return terminal + drift + driver; }
};

DataNorms data_norms(const RBSDEInput& in, double p, double alpha,
                     const AdaptedProcess& f_bound) {
    const FilteredSpace& sp = *in.space;
    DataNorms out;
    for (int w = 0; w < sp.outcome_count(); ++w) {
        const double xi_a = std::exp(alpha * sp.horizon()) * in.terminal[w];
        double var_v = 0.0, cost = 0.0;
        for (int k = 0; k < sp.steps(); ++k) {
            var_v += std::exp(alpha * sp.time(k + 1)) *
                     std::abs(in.drift.at(k + 1, w) - in.drift.at(k, w));
            cost += std::exp(alpha * sp.time(k)) * std::abs(f_bound.at(k, w)) * sp.dt(k);
        }
        out.terminal += sp.prob(w) * std::pow(std::abs(xi_a), p);
        out.drift += sp.prob(w) * std::pow(var_v, p);
        out.driver += sp.prob(w) * std::pow(cost, p);
    }
    return out;
}

std::string instance_digest(const RBSDEInput& in) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%dx%d:%s", in.space->steps(), in.space->outcome_count(),
                  in.driver.name.c_str());
    return buf;
}

}  // namespace

EstimateReport p_norm_estimate(const RBSDEInput& input, const Solution& sol, double p,
                               double alpha, const AdaptedProcess& f_bound) {
    check_estimate_preconditions(input, p, alpha);
    probe_growth_witness(input, sol, f_bound);
    const FilteredSpace& sp = *input.space;

    EstimateReport rep;
    rep.p = p;
    rep.alpha = alpha;
    rep.digest = instance_digest(input);

    const AdaptedProcess y_alpha = alpha_scale_process(sol.y, alpha);
    const AdaptedProcess bracket = quadratic_variation(sol.m);
    for (int w = 0; w < sp.outcome_count(); ++w) {
        double sup = 0.0;
        for (int k = 0; k <= sp.steps(); ++k) sup = std::max(sup, std::abs(y_alpha.at(k, w)));
        rep.sup_term += sp.prob(w) * std::pow(sup, p);
        rep.bracket_term += sp.prob(w) * std::pow(bracket.at(sp.steps(), w), p / 2.0);
    }
    const DataNorms norms = data_norms(input, p, alpha, f_bound);
    rep.terminal_term = norms.terminal;
    rep.drift_term = norms.drift;
    rep.driver_term = norms.driver;
    rep.lhs = rep.sup_term + rep.bracket_term;
    rep.rhs = norms.total();
    rep.ratio = rep.lhs / std::max(rep.rhs, tol::kRatioFloor);
    return rep;
}

double convexity_gap(double x, double y, double p) {
    const double phi_x = std::pow(std::abs(x), p);
    const double phi_y = std::pow(std::abs(y), p);
    const double dphi_y = p * std::pow(std::abs(y), p - 1.0) * sign_hat(y);
    const double m = std::max(std::abs(x), std::abs(y));
    const double curvature = m > 0 ? p * (p - 1.0) * std::pow(m, p - 2.0) : 0.0;
    return phi_x - phi_y - dphi_y * (x - y) - 0.5 * curvature * (x - y) * (x - y);
}

bool scalar_convexity_check(double x, double y, double p) {
    return convexity_gap(x, y, p) >= -tol::kExact;
}

double power_expansion_gap(const AdaptedProcess& x, double p, int s, int t) {
    const FilteredSpace& sp = x.space();
    if (s < 0 || t > sp.steps() || s > t) throw ValidationError("bad segment [s, t]");
    double worst = 0.0;
    for (int w = 0; w < sp.outcome_count(); ++w) {
        const double lhs =
            std::pow(std::abs(x.at(t, w)), p) - std::pow(std::abs(x.at(s, w)), p);
        double drift_sum = 0.0, jump_sum = 0.0;
        for (int k = s; k < t; ++k) {
            const double xk = x.at(k, w);
            const double dx = x.at(k + 1, w) - xk;
            const double linear = p * std::pow(std::abs(xk), p - 1.0) * sign_hat(xk) * dx;
            drift_sum += linear;
            jump_sum += std::pow(std::abs(x.at(k + 1, w)), p) -
                        std::pow(std::abs(xk), p) - linear;
        }
        // On a grid every move is a jump; the continuous-bracket term of the
        // expansion is identically zero and what remains is an identity, not
        // just an inequality.
        worst = std::max(worst, std::abs(lhs - drift_sum - jump_sum));
    }
    return worst;
}

bool tanaka_power_check(const AdaptedProcess& x, double p, int s, int t) {
    return power_expansion_gap(x, p, s, t) <= tol::kInvariant;
}

EnergyRatio supermartingale_energy_ratio(const AdaptedProcess& s) {
    const FilteredSpace& sp = s.space();
    const DoobDecomposition doob = doob_decomposition(s);
    // Bracket of the martingale part: on a grid the compensator jumps, so
    // [S] itself would double-count it (for a deterministic drop from 1 to 0
    // the intended ratio is (0 + 1)/1 = 1, not 2).
    const AdaptedProcess bracket = quadratic_variation(doob.martingale);
    EnergyRatio out;
    double sup_sq = 0.0;
    for (int w = 0; w < sp.outcome_count(); ++w) {
        double sup = 0.0;
        for (int k = 0; k <= sp.steps(); ++k) sup = std::max(sup, std::abs(s.at(k, w)));
        sup_sq += sp.prob(w) * sup * sup;
        const double k_n = doob.compensator.at(sp.steps(), w);
        out.energy += sp.prob(w) * (bracket.at(sp.steps(), w) + k_n * k_n);
    }
    out.sup_sq = sup_sq;
    out.ratio = out.energy / std::max(sup_sq, tol::kRatioFloor);
    return out;
}

SandwichWitness sandwich_witness(const RBSDEInput& input) {
    const FilteredSpace& sp = *input.space;
    SandwichWitness out;
    out.x = AdaptedProcess(input.space);
    for (int k = 0; k <= sp.steps(); ++k) {
        for (int w = 0; w < sp.outcome_count(); ++w) {
            double lo = input.lower ? input.lower->at(k, w) : 0.0;
            double hi = input.upper ? input.upper->at(k, w) : 0.0;
            if (!input.lower) lo = std::min(0.0, hi);
            if (!input.upper) hi = std::max(0.0, lo);
            if (lo > hi) {
                out.refutation = "barriers cross at step " + std::to_string(k) + ", outcome " +
                                 std::to_string(w);
                return out;
            }
            out.x.at(k, w) = std::clamp(0.0, lo, hi);
        }
    }
    out.feasible = true;
    const std::vector<double> zero_z(input.basis->dim(), 0.0);
    for (int w = 0; w < sp.outcome_count(); ++w) {
        double cost = 0.0;
        for (int k = 0; k < sp.steps(); ++k)
            cost += std::abs(input.driver(k, w, out.x.at(k, w), zero_z)) * sp.dt(k);
        out.driver_integral += sp.prob(w) * cost;
        for (int k = 0; k <= sp.steps(); ++k)
            out.sup_abs = std::max(out.sup_abs, std::abs(out.x.at(k, w)));
    }
    return out;
}

ChainReport driver_integral_ratio(const RBSDEInput& input, const Solution& sol, double p,
                                  double alpha, const AdaptedProcess& f_bound) {
    check_estimate_preconditions(input, p, alpha);
    const FilteredSpace& sp = *input.space;
    ChainReport rep;
    rep.p = p;
    rep.alpha = alpha;
    for (int w = 0; w < sp.outcome_count(); ++w) {
        double cost = 0.0;
        for (int k = 0; k < sp.steps(); ++k) {
            const int a = sp.atom_of(k, w);
            cost += std::abs(input.driver(k, w, sol.y.at(k, w), sol.z.at(k, a))) * sp.dt(k);
        }
        rep.lhs += sp.prob(w) * std::pow(cost, p);
    }
    rep.rhs = data_norms(input, p, alpha, f_bound).total();
    rep.ratio = rep.lhs / std::max(rep.rhs, tol::kRatioFloor);
    return rep;
}

}  // namespace rbsde
