#pragma once

namespace rbsde::tol {

// Numerical contract of the laboratory, pinned in one place.  Tests and the
// acceptance battery reference these names instead of re-typing literals.

/// Exact-arithmetic checks: identities that hold in exact arithmetic on a
/// finite space and are only allowed float-roundoff slack.
inline constexpr double kExact = 1e-12;

/// Structural solve invariants (equation residual, sandwich, minimality,
/// martingality, representation residuals).
inline constexpr double kInvariant = 1e-10;

/// Scalar implicit step: |g(y) - c| target for the root solve.
inline constexpr double kRootSolve = 1e-13;

/// Maximum safeguarded Newton/bisection rounds per scalar solve.
inline constexpr int kRootSolveMaxRounds = 200;

/// Picard fixed-point distance target and window iteration cap.
inline constexpr double kPicardTol = 1e-12;
inline constexpr int kPicardMaxIter = 50;

/// Agreement between the Picard fixed point and the direct scheme.
inline constexpr double kPicardMatch = 1e-9;

/// Penalization convergence target at the final rung of the dyadic sweep.
inline constexpr double kPenalization = 1e-3;

/// Probability mass must sum to one within this.
inline constexpr double kProbSum = 1e-12;

/// Floor used when a ratio denominator can be zero.
inline constexpr double kRatioFloor = 1e-12;

/// dt * max(mu, 0) must stay below this for the implicit step to be monotone.
inline constexpr double kStepMonotone = 0.5;

}  // namespace rbsde::tol
