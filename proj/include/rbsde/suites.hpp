#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rbsde {

/// Master seed used by the default battery and the acceptance run.
inline constexpr std::uint64_t kDefaultSeed = 1729;

/// One property row of a suite: `worst` is the largest observed violation
/// (or deviation) across `instances` randomized instances, `pass` means
/// worst <= bound.
struct CheckRow {
    std::string name;
    int instances = 0;
    double worst = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct SuiteResult {
    /// Wall-clock budget rows.  Kept separate from `checks` and excluded
    /// from csv() so that timing jitter can never break byte-identical
    /// reports; the CLI prints them alongside the table.
    struct Timing {
        std::string name;
        double seconds = 0.0;
        double budget = 0.0;
        bool pass = false;
    };

    std::string suite;
    std::vector<CheckRow> checks;
    std::vector<Timing> timings;

    bool pass() const;       ///< every check row and every timing row
    std::string csv() const; ///< header + one line per check row, 17-digit floats
};

// --- individual suites -----------------------------------------------------
// `instances` <= 0 selects the default count quoted in the comment.

/// Paper-exact pins of the two-outcome predictable-drop scenario, plus its
/// runtime budget (1 ms).
SuiteResult suite_counterexample();

/// Envelope vs exhaustive-stopping oracle on random trees (default 100).
SuiteResult suite_snell_oracle(std::uint64_t seed, int instances = 0);

/// Penalized scheme vs projection on active two-barrier instances
/// (default 25), dyadic intensities n = m = 2^4..2^12; 30 s budget.
SuiteResult suite_penalization(std::uint64_t seed, int instances = 0);

/// Game values: minimax over enumerated stopping-time pairs vs backward
/// induction vs the two-barrier solve (default 50).
SuiteResult suite_dynkin(std::uint64_t seed, int instances = 0);

/// Comparison theorems on ordered data pairs, one-barrier / two-barrier /
/// shared-barrier force ordering (default 200 pairs each).
SuiteResult suite_comparison(std::uint64_t seed, int instances = 0);

/// Solve invariants across a mixed instance family plus the serial
/// reference solver agreement (default 60).
SuiteResult suite_invariants(std::uint64_t seed, int instances = 0);

/// Basis orthogonality, element martingality, exact representation and
/// bracket-norm identity (default 50 spaces x 20 martingales).
SuiteResult suite_martingale_rep(std::uint64_t seed, int instances = 0);

/// Picard iteration on z-dependent instances with lambda dt <= 0.1
/// (default 25): direct match, iteration budget, window contraction trend.
SuiteResult suite_picard(std::uint64_t seed, int instances = 0);

/// Scalar convexity inequality (1e5 triples), discrete power expansion
/// identity (1e4 paths), reflection jump formula, reflection increment
/// bound.  Counts are fixed; `instances` is ignored.
SuiteResult suite_inequalities(std::uint64_t seed);

/// No-regression bounds against the committed calibration fixture:
/// re-measures the recorded instance family and compares against the stored
/// constants.  Empty path selects the committed fixture.
SuiteResult suite_constants(std::uint64_t seed, const std::string& fixtures_path = "");

/// Runs the battery twice and byte-compares the reports.
SuiteResult suite_determinism(std::uint64_t seed);

// --- battery ----------------------------------------------------------------

std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, std::uint64_t seed, int instances = 0);

/// All suites except determinism, canonical order, default instance counts.
std::vector<SuiteResult> run_battery(std::uint64_t seed);

/// Single CSV table (one header) over all suites; excludes timings.
std::string battery_report(const std::vector<SuiteResult>& results);

/// Measures the empirical-constant families and returns the fixture JSON
/// (constants = measured maxima scaled by `margin`).  The committed fixture
/// is produced by the `calibrate` subcommand with the defaults.
std::string calibrate_constants(std::uint64_t seed = kDefaultSeed, int instances = 40,
                                double margin = 2.0);

/// Path of the committed calibration fixture inside the source tree.
std::string default_fixtures_path();

}  // namespace rbsde
