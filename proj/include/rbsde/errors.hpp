#pragma once

#include <stdexcept>
#include <string>

namespace rbsde {

/// Base class for all laboratory errors.  Every failure mode a caller can
/// trigger with bad inputs maps to one of the subclasses below; internal
/// logic errors stay on assert().
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Space, process or stopping-time data violates a structural invariant
/// (partition not refining, probabilities off, adaptedness broken, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// A combinatorial enumeration would exceed the caller's budget.
struct CountExceeded : Error {
    using Error::Error;
};

/// Process handed to the Doob decomposition fails the supermartingale
/// inequality beyond tolerance; message names the worst (step, atom).
struct NotSupermartingale : Error {
    using Error::Error;
};

/// Process fails the martingale property beyond tolerance.
struct NotMartingale : Error {
    using Error::Error;
};

/// dt * max(mu, 0) > 1/2 for some step: the implicit scalar equation is no
/// longer guaranteed monotone, so the solver refuses to run.
struct StepSizeTooLarge : Error {
    using Error::Error;
};

/// Scalar root solve could not bracket or converge within its round budget.
struct RootBracketFailure : Error {
    using Error::Error;
};

/// Lower barrier exceeds upper barrier somewhere.
struct BarrierCrossing : Error {
    using Error::Error;
};

/// Fixed-point iteration failed to reach tolerance within max_iter.
struct NoConvergence : Error {
    using Error::Error;
};

/// Malformed scenario/config input.
struct ConfigError : Error {
    using Error::Error;
};

/// A structural hypothesis probe (growth or monotonicity witness) failed on
/// the instance at hand.
struct HypothesisUnverified : Error {
    using Error::Error;
};

}  // namespace rbsde
