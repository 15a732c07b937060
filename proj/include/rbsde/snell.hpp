#pragma once

#include "rbsde/process.hpp"

namespace rbsde {

/// Optimal-stopping data: lower reward L (paid when stopping before the
/// horizon), terminal reward xi, and a cumulative adapted reward V with
/// V_0 = 0 whose increments accrue while running.
struct SnellProblem {
    AdaptedProcess reward;       ///< L
    std::vector<double> terminal;  ///< xi, per outcome
    AdaptedProcess running;      ///< V

    const FilteredSpace& space() const { return reward.space(); }
    void validate() const;
};

/// Backward recursion Y_N = xi, Y_k = max(L_k, E[Y_{k+1} + dV_{k+1} | F_k]).
AdaptedProcess snell_envelope(const SnellProblem& problem);

/// Independent oracle: per atom of partitions[start], the maximum over all
/// exhaustively enumerated stopping times tau of
///   E[ sum_{j=start+1}^{tau} dV_j + L_tau 1{tau<N} + xi 1{tau=N} | atom ].
/// Values returned per atom of partitions[start].  Throws CountExceeded if
/// the enumeration on some atom would exceed max_count.
std::vector<double> snell_oracle(const SnellProblem& problem, int start,
                                 std::uint64_t max_count);

/// Gap in the projected one-step identity
///   Y_{k-1} = L_{k-1} v ( E[Y_k | F_{k-1}] + E[dV_k | F_{k-1}] ),
/// maximized over k >= 1 and atoms.  Zero (to roundoff) for every envelope:
/// the identity is exact on finite spaces.
double recursion_identity_gap(const SnellProblem& problem, const AdaptedProcess& y);

/// Pathwise one-step gaps |Y_{k-1} - L_{k-1} v (Y_k + dV_k)| per (k, outcome).
/// Unlike the projected identity this can be strictly positive when the
/// envelope drops at a predictable step; the two-outcome counterexample
/// scenario pins the canonical violation.
struct PathwiseGaps {
    std::vector<std::vector<double>> gap;  ///< [k][outcome], k = 1..N (row 0 zero)
    double max_gap = 0.0;
};
PathwiseGaps pathwise_recursion_gap(const SnellProblem& problem, const AdaptedProcess& y);

}  // namespace rbsde
