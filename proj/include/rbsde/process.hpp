#pragma once

#include <span>
#include <vector>

#include "rbsde/filtration.hpp"

namespace rbsde {

/// Dense (steps+1) x outcomes matrix of real values on a filtered space.
/// Base container for both measurability flavours below; rows are per-step
/// outcome vectors.
class ProcessGrid {
  public:
    ProcessGrid() = default;
    ProcessGrid(SpacePtr space, double fill = 0.0);

    const FilteredSpace& space() const { return *space_; }
    SpacePtr space_ptr() const { return space_; }

    double& at(int k, int w) { return rows_[k][w]; }
    double at(int k, int w) const { return rows_[k][w]; }
    std::vector<double>& row(int k) { return rows_[k]; }
    const std::vector<double>& row(int k) const { return rows_[k]; }
    int rows() const { return static_cast<int>(rows_.size()); }

    /// Increment over (t_{k-1}, t_k]: at(k) - at(k-1), per outcome.
    std::vector<double> increment(int k) const;

    /// Set every outcome of atom a at step `k_atom` of the row `k` to v.
    void set_atom(int k, int k_atom, int a, double v);

  protected:
    SpacePtr space_;
    std::vector<std::vector<double>> rows_;
};

/// X_k measurable w.r.t. partitions[k] for every k.
class AdaptedProcess : public ProcessGrid {
  public:
    AdaptedProcess() = default;
    explicit AdaptedProcess(SpacePtr space, double fill = 0.0)
        : ProcessGrid(std::move(space), fill) {}

    /// Validating constructor for externally supplied matrices.
    static AdaptedProcess from_rows(SpacePtr space, std::vector<std::vector<double>> rows);

    /// Value on atom a of partitions[k] (all members agree by adaptedness).
    double atom_value(int k, int a) const {
        return rows_[k][space_->atom(k, a).members.front()];
    }

    void validate() const;
};

/// X_k measurable w.r.t. partitions[k-1] for k >= 1; the step-0 value is
/// measurable w.r.t. partitions[0].
class PredictableProcess : public ProcessGrid {
  public:
    PredictableProcess() = default;
    explicit PredictableProcess(SpacePtr space, double fill = 0.0)
        : ProcessGrid(std::move(space), fill) {}

    static PredictableProcess from_rows(SpacePtr space, std::vector<std::vector<double>> rows);

    /// Value of X_k on atom a of partitions[k-1] (k >= 1).
    double atom_value_prev(int k, int a) const {
        return rows_[k][space_->atom(k - 1, a).members.front()];
    }

    void validate() const;

    /// Every predictable process is in particular adapted (partitions refine).
    AdaptedProcess as_adapted() const;
};

/// Doob decomposition S = S_0 - K + M of a supermartingale: K predictable,
/// nondecreasing, K_0 = 0; M a martingale with M_0 = 0.
struct DoobDecomposition {
    PredictableProcess compensator;  ///< K
    AdaptedProcess martingale;       ///< M
};

/// Minimal split R = plus - minus of a predictable finite-variation process
/// into nondecreasing predictable parts (per-step Jordan decomposition).
struct FVDecomposition {
    PredictableProcess plus;
    PredictableProcess minus;
};

/// (pX)_k = E[X_k | partitions[k-1]] for k >= 1, (pX)_0 = X_0.
PredictableProcess predictable_projection(const AdaptedProcess& x);

/// Dual predictable projection of a finite-variation process A with A_0 = 0:
/// increments E[dA_k | partitions[k-1]], accumulated from 0.  Preserves
/// expectation: E A^p_N = E A_N exactly.
PredictableProcess dual_predictable_projection(const AdaptedProcess& a);

/// Checks E[S_{k+1} | partitions[k]] <= S_k + tolerance on every atom and
/// returns the decomposition.  Throws NotSupermartingale otherwise, naming
/// the worst (step, atom).
DoobDecomposition doob_decomposition(const AdaptedProcess& s, double tolerance = 1e-12);

/// Largest violation of the martingale property, max over (k, atom) of
/// |E[X_{k+1}|partitions[k]] - X_k|.
double martingale_defect(const AdaptedProcess& x);

/// Per-step Jordan split of a predictable process with R_0 = 0.  The split
/// is minimal: any other predictable split R = P - Q with nondecreasing P, Q
/// has P_N >= plus_N and Q_N >= minus_N pathwise.
FVDecomposition jordan_split(const PredictableProcess& r);

/// Pathwise quadratic variation [X]_k = sum_{j<=k} (dX_j)^2.
AdaptedProcess quadratic_variation(const AdaptedProcess& x);

/// E sup_k |X_k|^p, E (sum_k |dX_k|)^p and E ([X]_N)^{p/2} for p in (0, 2].
struct PathNorms {
    double sup_p = 0.0;
    double var_p = 0.0;
    double bracket_p = 0.0;
};
PathNorms path_norms(const AdaptedProcess& x, double p);

}  // namespace rbsde
