#pragma once

#include <cstdint>

#include "rbsde/rng.hpp"
#include "rbsde/solver.hpp"

namespace rbsde {

/// Shape of a randomly grown partition tree.  Atom counts are softly capped:
/// once a level holds 256 atoms further splitting stops, so outcome counts
/// stay desk-sized for any depth.
struct TreeOptions {
    int steps = 4;
    int min_branch = 1;
    int max_branch = 3;
    bool irregular_times = true;  ///< random step lengths, horizon fixed at 1
};

/// Random refining-partition space; deterministic in the seed.  Child
/// weights are uniform in [0.2, 1] before normalization, so every
/// conditional probability is bounded away from 0.
SpacePtr random_tree_space(std::uint64_t seed, const TreeOptions& opt = {});

/// Uniform(-scale, scale) per (step, atom).
AdaptedProcess random_adapted(SpacePtr space, Rng& rng, double scale = 1.0);

/// Adapted, X_0 = 0, per-step atom increments uniform(-scale, scale).
AdaptedProcess random_drift(SpacePtr space, Rng& rng, double scale = 0.3);

/// Closed martingale E[xi | F_k] of a uniform(-scale, scale) terminal row.
AdaptedProcess random_martingale(SpacePtr space, Rng& rng, double scale = 1.0);

/// Martingale minus an independent predictable nondecreasing process.
AdaptedProcess random_supermartingale(SpacePtr space, Rng& rng, double scale = 1.0);

/// Uniform(-scale, scale) per atom of the finest partition.
std::vector<double> random_terminal(const FilteredSpace& space, Rng& rng, double scale = 1.0);

/// Instance family knobs for the property suites.  Barriers are anchored on
/// a random martingale with node-local bumps, which makes reflection bind at
/// a positive fraction of nodes; when `require_active_*` is set the builder
/// redraws (derived sub-seeds, bounded attempts) until the solved reflection
/// forces exceed `min_force`, so convergence suites never run on vacuous
/// instances.
struct InstanceOptions {
    TreeOptions tree{};
    /// One of "zero", "linear-y", "monotone-cubic", "z-linear".
    std::string driver_kind = "linear-y";
    bool lower = true;
    bool upper = false;
    bool require_active_lower = false;
    bool require_active_upper = false;
    double min_force = 0.02;     ///< threshold on E R+-_N for "active"
    double force_scale = 0.25;   ///< size of the barrier bumps
    double drift_scale = 0.25;   ///< size of dV
    double lambda_dt_cap = 0.1;  ///< z-linear drivers keep lambda * dt below this
    int max_redraws = 64;
};

RBSDEInput random_instance(std::uint64_t seed, const InstanceOptions& opt = {});

/// Ordered data pairs for the comparison suites.
enum class PairKind {
    OneBarrier,  ///< xi, dV, f, L all raised; lower barrier only
    TwoBarrier,  ///< xi, dV, f, L, U all raised (gap kept nonnegative)
    SameBarrier  ///< same L, raised xi/dV/f; for the force comparison
};
struct OrderedPair {
    RBSDEInput low;
    RBSDEInput high;
};
OrderedPair random_ordered_pair(std::uint64_t seed, PairKind kind);

/// Lower barrier with an explicit decomposition L = L_0 - A + N (A adapted
/// nondecreasing, A_0 = 0; N martingale, N_0 = 0) and terminal xi >= L_N,
/// as required by the reflection-increment bound suite.
struct SemimartingaleBarrierInstance {
    RBSDEInput input;
    AdaptedProcess a_part;  ///< A
    AdaptedProcess n_part;  ///< N
    double l0 = 0.0;
};
SemimartingaleBarrierInstance random_semimartingale_barrier(std::uint64_t seed,
                                                            bool zero_driver,
                                                            bool with_drift);

}  // namespace rbsde
