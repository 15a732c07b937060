#pragma once

#include <optional>
#include <utility>

#include "rbsde/generator.hpp"
#include "rbsde/martingale_basis.hpp"
#include "rbsde/process.hpp"

namespace rbsde {

using BasisPtr = std::shared_ptr<const MartingaleBasis>;

/// Data of a reflected backward equation on the grid:
///
///   Y_k = Y_{k+1} + f(t_k, Y_k, Z_k) dt_k + dV_{k+1} + dR+_{k+1} - dR-_{k+1}
///         - dM_{k+1},                 Y_N = xi,   L_k <= Y_k <= U_k (k < N),
///
/// where dX_{k+1} = X_{k+1} - X_k.  The reflection increments dR±_{k+1} and
/// the coefficient Z_k are measurable w.r.t. partitions[k] and act on the
/// transition (t_k, t_{k+1}]; dM_{k+1} has zero conditional mean given
/// partitions[k].  Barriers are optional; both absent gives a plain backward
/// equation.
struct RBSDEInput {
    SpacePtr space;
    BasisPtr basis;
    std::vector<double> terminal;          ///< xi, per outcome
    AdaptedProcess drift;                  ///< V with V_0 = 0
    std::optional<AdaptedProcess> lower;   ///< L
    std::optional<AdaptedProcess> upper;   ///< U
    Generator driver;

    /// Structural checks; throws ValidationError / BarrierCrossing /
    /// StepSizeTooLarge (dt * max(mu, 0) must stay <= 1/2 so the implicit
    /// scalar equation is strictly monotone).
    void validate() const;
};

/// Convenience assembly: builds the basis, fills V with zeros when absent.
RBSDEInput make_input(SpacePtr space, std::vector<double> terminal, Generator driver,
                      std::optional<AdaptedProcess> lower = std::nullopt,
                      std::optional<AdaptedProcess> upper = std::nullopt,
                      std::optional<AdaptedProcess> drift = std::nullopt);

struct Solution {
    AdaptedProcess y;
    ZCoefficients z;
    AdaptedProcess m;            ///< martingale part, M_0 = 0
    PredictableProcess r_plus;   ///< cumulative lower reflection force
    PredictableProcess r_minus;  ///< cumulative upper reflection force
};

/// One scalar implicit step at (step k, outcome w representative of its
/// atom): solves g(y) = y - dt f(t_k, y, z) = c to |g(y) - c| <= 1e-13 by
/// safeguarded Newton/bisection, then clamps into [lower, upper]:
/// y < lower gives y = lower, dr_plus = g(lower) - c > 0 (symmetrically for
/// upper), so the step equation holds exactly with the reported force.
struct ImplicitStep {
    double y = 0.0;
    double dr_plus = 0.0;
    double dr_minus = 0.0;
};
ImplicitStep implicit_step(const Generator& f, int k, int w, double dt, double c,
                           std::span<const double> z, std::optional<double> lower,
                           std::optional<double> upper);

/// Backward solve with projection (clamping) at the barriers.  Z_k is the
/// representation of the centered one-step innovation and is known before
/// the scalar solve, so z-dependent drivers are handled directly.  The
/// per-atom solves inside each step are independent and run under OpenMP;
/// results are byte-identical to the serial path.
Solution solve_reflected(const RBSDEInput& input);

/// Penalized scheme: no clamping; the driver is augmented by
/// n (y - L_k)^- - m (y - U_k)^+ inside the same monotone implicit solve.
/// lower_force / upper_force accumulate the applied penalty
/// n (Y_k - L_k)^- dt_k and m (Y_k - U_k)^+ dt_k.
struct PenalizedSolution {
    Solution base;
    PredictableProcess lower_force;  ///< K^n
    PredictableProcess upper_force;  ///< A^{n,m}
};
PenalizedSolution solve_penalized(const RBSDEInput& input, double n, double m);

/// Dyadic penalization sweep against the projection solution.  One row per
/// (n, m) pair; monotone flags compare consecutive rungs at the frozen other
/// intensity (value nondecreasing in n, nonincreasing in m).
struct SweepRow {
    double n = 0.0, m = 0.0;
    double max_error = 0.0;        ///< max_{k,w} |Y^{n,m} - Y|
    double lower_force_gap = 0.0;  ///< |E K^n_N - E R+_N|
    double upper_force_gap = 0.0;  ///< |E A^{n,m}_N - E R-_N|
    bool monotone_up = true;       ///< Y^{n_{j+1}, m_j} >= Y^{n_j, m_j}
    bool monotone_down = true;     ///< Y^{n_j, m_{j+1}} <= Y^{n_j, m_j}
};
struct SweepReport {
    std::vector<SweepRow> rows;
    double reference_lower_force = 0.0;  ///< E R+_N
    double reference_upper_force = 0.0;  ///< E R-_N
};
SweepReport penalization_sweep(const RBSDEInput& input,
                               const std::vector<std::pair<double, double>>& schedule);

/// Picard iteration for z-dependent drivers: freeze z = H from the previous
/// iterate, solve the reflected equation with the z-frozen driver, update H
/// with the new coefficients; distance is sup-norm on Y plus the p = 2
/// bracket norm on the Z difference.  The horizon splits into `windows`
/// contiguous chunks processed backward; each window iterates to `tol` or
/// throws NoConvergence after max_iter sweeps.  At the fixed point the
/// output solves exactly the direct scheme of solve_reflected.
struct PicardWindow {
    int first_step = 0, last_step = 0;       ///< solves steps [first, last)
    int iterations = 0;
    std::vector<double> distances;           ///< successive iterate distances
    std::vector<double> contraction_factors; ///< dist_{i+1} / dist_i above noise
};
struct PicardResult {
    Solution solution;
    std::vector<PicardWindow> windows;
    /// Largest contraction factor observed across windows (0 when the
    /// iteration converged before producing a measurable ratio).
    double max_contraction_factor = 0.0;
};
PicardResult solve_picard(const RBSDEInput& input, double tol, int max_iter, int windows);

/// Maximum violations of the solve invariants; every entry should be below
/// 1e-10 for any solve this library produces.
struct InvariantReport {
    double equation_residual = 0.0;   ///< pathwise step equation
    double terminal_gap = 0.0;        ///< |Y_N - xi|
    double barrier_gap = 0.0;         ///< sandwich violation at k < N
    double minimality_gap = 0.0;      ///< |(Y_k - L_k) dR+_{k+1}|, sym. above
    double force_overlap = 0.0;       ///< dR+_{k+1} * dR-_{k+1}
    double martingale_gap = 0.0;      ///< |E[dM_{k+1} | atom]|
    double reconstruction_gap = 0.0;  ///< |sum_i z^i dM^i - dM| on children
    double worst() const;
};
InvariantReport solution_invariants(const RBSDEInput& input, const Solution& sol);

namespace reference {
/// Plain serial backward induction kept as the cross-check for the OpenMP
/// kernel in solve_reflected: independent loop structure, bisection-only
/// scalar solve.
Solution solve_reflected_serial(const RBSDEInput& input);
}  // namespace reference

}  // namespace rbsde
