#pragma once

#include "rbsde/solver.hpp"

namespace rbsde {

/// A two-barrier stopping game.  The maximizer picks tau and collects
/// L_tau when stopping first (ties go to the maximizer), the minimizer picks
/// sigma and pays U_sigma when stopping strictly first, both collect xi when
/// neither stops before the horizon, and the running reward
/// f(t_k, Y_k) dt_k + dV accrues until min(sigma, tau).  The driver argument
/// is frozen at the solved value process Y, so the game is well-defined data
/// once a solve exists; for driver-free games Y can be all zeros.
struct DynkinGame {
    const RBSDEInput* data = nullptr;  ///< must carry both barriers, z-free driver
    const AdaptedProcess* value = nullptr;  ///< solved Y (frozen into the payoff)

    const FilteredSpace& space() const { return *data->space; }
    void validate() const;
};

/// Pathwise payoff of the pair (sigma, tau) from `start`:
///   sum_{j=start}^{min-1} f(t_j, Y_j) dt_j + sum_{j=start+1}^{min} dV_j
///   + L_tau 1{tau < N, tau <= sigma} + U_sigma 1{sigma < tau}
///   + xi 1{sigma = tau = N},            min = min(sigma, tau).
std::vector<double> game_payoff(const DynkinGame& game, const StoppingTime& sigma,
                                const StoppingTime& tau, int start);

/// Backward induction value:
///   W_N = xi,  W_k = clamp(E[W_{k+1}|F_k] + f(t_k, Y_k) dt_k + E[dV_{k+1}|F_k],
///                          L_k, U_k).
AdaptedProcess game_value_induction(const DynkinGame& game);

/// Exhaustive minimax over enumerated stopping-time pairs, per atom of
/// partitions[start]:
///   lower = max_tau min_sigma E[payoff | atom],
///   upper = min_sigma max_tau E[payoff | atom].
/// On these games the two coincide with the induction value.  sigma_star /
/// tau_star realize the minimax on the first atom.  The pair table is
/// embarrassingly parallel and runs under OpenMP; game_values_reference is
/// the serial cross-check kept for testing.
struct GameValues {
    std::vector<double> lower;  ///< per atom of partitions[start]
    std::vector<double> upper;
    StoppingTime sigma_star, tau_star;
};
GameValues game_values(const DynkinGame& game, std::uint64_t max_count, int start = 0);
GameValues game_values_reference(const DynkinGame& game, std::uint64_t max_count,
                                 int start = 0);

}  // namespace rbsde
