#pragma once

#include <span>
#include <vector>

#include "rbsde/process.hpp"

namespace rbsde {

/// Orthogonal basis of one-step martingale increments.
///
/// For every atom A of partitions[k] with children c_1 < ... < c_d the
/// functions on A's children with zero conditional mean form a (d-1)-
/// dimensional space.  We orthogonalize the seed vectors
/// 1_{c_{i+1}} - 1_{c_i}, i = 1..d-1 (centered, in child order) under the
/// conditional inner product <u, v> = E[u v | A].  The raw Gram-Schmidt
/// scale is kept: no unit-variance normalization, so the basis is unique
/// given the child ordering, and the ordering is fixed once at space
/// construction.
///
/// Stacking the step-k increments gives global martingales M^1..M^{d*}
/// (d* = max branching - 1) that are pairwise orthogonal; every martingale
/// on the space is an exact linear combination of their increments with
/// previsible coefficients.
class MartingaleBasis {
  public:
    struct AtomBlock {
        /// incr[i][j] = value of dM^{i+1} on child j of the atom (child-local
        /// index, in the atom's child order).  Size: dim x child count.
        std::vector<std::vector<double>> incr;
        /// bracket[i] = d<M^{i+1}> on the atom = E[(dM^{i+1})^2 | atom].
        std::vector<double> bracket;
        /// density[i] = bracket[i] / dt_k.
        std::vector<double> density;
        int dim = 0;  ///< child count - 1
    };

    static MartingaleBasis build(SpacePtr space);

    const FilteredSpace& space() const { return *space_; }
    SpacePtr space_ptr() const { return space_; }
    int dim() const { return d_star_; }  ///< d*
    const AtomBlock& block(int k, int a) const { return blocks_[k][a]; }

    /// Realize basis element M^i (1-based up to d*) as an adapted process
    /// with M^i_0 = 0.
    AdaptedProcess element(int i) const;

  private:
    SpacePtr space_;
    int d_star_ = 0;
    std::vector<std::vector<AtomBlock>> blocks_;  ///< [k][atom], k = 0..N-1
};

/// Previsible representation coefficients: z(k, atom) is the coefficient
/// vector of length d* attached to the transition (t_k, t_{k+1}], constant
/// on the atoms of partitions[k].  Entries beyond the atom's local dimension
/// are zero.
class ZCoefficients {
  public:
    ZCoefficients() = default;
    ZCoefficients(const MartingaleBasis& basis);

    std::span<const double> at(int k, int a) const { return coeffs_[k][a]; }
    std::span<double> at(int k, int a) { return coeffs_[k][a]; }
    int steps() const { return static_cast<int>(coeffs_.size()); }
    int dim() const { return dim_; }

  private:
    int dim_ = 0;
    std::vector<std::vector<std::vector<double>>> coeffs_;  ///< [k][atom][i]
};

/// Coefficients of a martingale M against the basis:
/// z^i(k, A) = E[dM_{k+1} dM^i_{k+1} | A] / d<M^i>_{k+1}(A), zero when the
/// bracket vanishes.  Reconstruction sum_i z^i dM^i = dM is exact.
/// Throws NotMartingale when M fails the martingale property.
ZCoefficients represent(const MartingaleBasis& basis, const AdaptedProcess& m,
                        double tolerance = 1e-12);

/// State-dependent norm of a coefficient vector at (k, atom):
/// |z|_{M}(k, A) = sqrt(sum_i z_i^2 m^i(k, A)) with the bracket densities
/// m^i = d<M^i>/dt.  Homogeneous of degree 1 in z.
double m_norm(const MartingaleBasis& basis, int k, int a, std::span<const double> z);

/// E ( sum_k sum_i |z^i(k)|^2 d<M^i>_{k+1} )^{p/2} for p in (0, 2].
double mp_norm(const MartingaleBasis& basis, const ZCoefficients& z, double p);

}  // namespace rbsde
