#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rbsde/errors.hpp"

namespace rbsde {

/// One elementary outcome of the finite sample space.
struct Outcome {
    std::string id;
    double prob = 0.0;
};

class FilteredSpace;
using SpacePtr = std::shared_ptr<const FilteredSpace>;

/// A finite filtered probability space: outcomes with strictly positive
/// probabilities, a strictly increasing time grid t_0 = 0 < ... < t_N = T,
/// and one partition of the outcome set per grid point.  partitions[k+1]
/// refines partitions[k], so the filtration is the partition tree and every
/// conditional expectation is an exact probability-weighted average over the
/// atoms of a partition.
///
/// Index conventions used across the laboratory:
///   * step k lives at time times[k]; there are N = steps() transitions;
///   * an "atom at step k" is an element of partitions[k];
///   * a value attached to the transition (t_k, t_{k+1}] is stored at index
///     k+1 when it is an increment of a process, and at index k when it is a
///     per-step coefficient (generator values, representation coefficients);
///   * "previsible at step k" means constant on atoms of partitions[k-1].
class FilteredSpace {
  public:
    struct Atom {
        std::vector<int> members;   ///< outcome indices, ascending
        double prob = 0.0;          ///< total probability of the atom
        int parent = -1;            ///< atom index at step k-1 (-1 at step 0)
        std::vector<int> children;  ///< atom indices at step k+1 (empty at N)
    };

    /// Validates and builds.  `partitions[k]` lists atoms as sets of outcome
    /// indices.  Throws ValidationError on any structural defect.
    static SpacePtr create(std::vector<Outcome> outcomes,
                           std::vector<double> times,
                           std::vector<std::vector<std::vector<int>>> partitions);

    int steps() const { return static_cast<int>(times_.size()) - 1; }
    int outcome_count() const { return static_cast<int>(outcomes_.size()); }
    const Outcome& outcome(int i) const { return outcomes_[i]; }
    const std::vector<double>& times() const { return times_; }
    double time(int k) const { return times_[k]; }
    double horizon() const { return times_.back(); }
    double dt(int k) const { return times_[k + 1] - times_[k]; }

    int atom_count(int k) const { return static_cast<int>(levels_[k].size()); }
    const Atom& atom(int k, int a) const { return levels_[k][a]; }
    int atom_of(int k, int outcome) const { return atom_of_[k][outcome]; }
    /// Largest branching factor minus one over all atoms below step N; this
    /// is the dimension d* of the orthogonal martingale basis.
    int max_children() const { return max_children_; }

    double prob(int outcome) const { return outcomes_[outcome].prob; }

    /// E[x | atom a of partitions[k]].
    double cond_expect_atom(std::span<const double> x, int k, int a) const;
    /// E[x | partitions[k]] extended back to a per-outcome vector.
    std::vector<double> cond_expect(std::span<const double> x, int k) const;
    double expect(std::span<const double> x) const;

    /// True when x is constant on every atom of partitions[k] (exact
    /// comparison; all producers in this library write atom-constant data).
    bool constant_on(std::span<const double> x, int k) const;

  private:
    FilteredSpace() = default;

    std::vector<Outcome> outcomes_;
    std::vector<double> times_;
    std::vector<std::vector<Atom>> levels_;
    std::vector<std::vector<int>> atom_of_;
    int max_children_ = 0;
};

/// A stopping time on the partition tree: value(w) in {0,...,N} with
/// {value = k} a union of atoms of partitions[k].
struct StoppingTime {
    std::vector<int> value;  ///< per outcome

    /// Throws ValidationError if the adaptedness constraint fails.
    void validate(const FilteredSpace& space) const;
};

/// Number of stopping times with values in {k,...,N} on the subtree rooted
/// at atom a of partitions[k], computed by the product recursion
/// c(node) = 1 + prod_children c(child) with c(leaf at N) = 1.  Saturates at
/// cap; never overflows.
std::uint64_t stopping_time_count(const FilteredSpace& space, int k, int a,
                                  std::uint64_t cap);

/// Total number of stopping times with values in {start,...,N}.
std::uint64_t stopping_time_count(const FilteredSpace& space, int start,
                                  std::uint64_t cap);

/// Exhaustively enumerates stopping times with values in {start,...,N}.
/// Throws CountExceeded if the count exceeds max_count.
std::vector<StoppingTime> enumerate_stopping_times(const FilteredSpace& space,
                                                   std::uint64_t max_count,
                                                   int start = 0);

/// Enumerates the restrictions of stopping times to the subtree rooted at
/// atom a of partitions[k].  Each entry assigns values only to the atom's
/// members (outcomes outside keep value N so the object stays well-formed).
std::vector<StoppingTime> enumerate_stopping_times_on_atom(
    const FilteredSpace& space, int k, int a, std::uint64_t max_count);

}  // namespace rbsde
