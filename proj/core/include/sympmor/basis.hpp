#pragma once

#include "sympmor/snapshots.hpp"
#include "sympmor/types.hpp"

#include <string>

namespace sympmor {

/// Which state approximation a basis set feeds.
enum class BasisKind {
    lsl,  ///< linear symplectic lift: y ~ y_ref + blkdiag(Phi, Phi) z
    qmcl, ///< quadratic manifold cotangent lift (shares Phi, adds Vbar_q)
    bq,   ///< blockwise quadratic (adds independent Vbar_q and Vbar_p)
};

std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

/// Orthonormal position basis plus the quadratic correction operators the
/// different mappings need.  Unused blocks are empty (0 x 0).
struct ReductionBasis {
    BasisKind kind = BasisKind::lsl;
    Matrix Phi;     ///< n x r, orthonormal columns
    Matrix Vbar_q;  ///< n x r(r+1)/2, complement-projected (empty for lsl)
    Matrix Vbar_p;  ///< n x r(r+1)/2 (bq only)
    double gamma_q = 0.0;
    double gamma_p = 0.0;

    Index n() const { return Phi.rows(); }
    Index r() const { return Phi.cols(); }

    /// Persist to a directory: Phi.mrx1 (+Vbar_q.mrx1, +Vbar_p.mrx1) and
    /// meta.json carrying {kind, r, gamma_q, gamma_p}.
    void save(const std::string& dir) const;
    static ReductionBasis load(const std::string& dir);
};

/// Leading left singular vectors with their singular values.  sigma holds the
/// computed spectrum (descending): the full spectrum on the dense path, the
/// leading oversampled block on the iterative large-scale path.  U keeps only
/// the requested leading columns, and numerical_rank counts the computed
/// singular values above the rank floor (a lower bound on the true rank when
/// only a leading block was computed).
struct TruncatedSvd {
    Matrix U;
    Vector sigma;
    Index numerical_rank = 0;
};

/// Left singular vectors of the extended snapshot matrix (Q, gamma P),
/// computed by the method of snapshots on the smaller Gram matrix
/// (Q Q^T + gamma^2 P P^T is never larger than n x n and the extended matrix
/// itself is never formed).  When even that Gram matrix would be too
/// expensive, a deterministic blocked subspace iteration computes the leading
/// block instead.  Columns are sign-fixed so the entry of largest magnitude
/// is positive.  Throws NumericalError when max_r exceeds the numerical rank
/// (singular values below 1e-12 sigma_1), reporting both.
TruncatedSvd extended_svd(const SnapshotSet& snapshots, Index max_r);

/// Cotangent-lift basis: the leading r columns from extended_svd using the
/// snapshot set's momentum scale.  Requires 1 <= r <= min(n, 2 n_s).
Matrix cotangent_lift(const SnapshotSet& snapshots, Index r);

/// Plain POD (method of snapshots) of an arbitrary data matrix: leading
/// max_k left singular vectors of Y.  Same sign fix and rank guard.
TruncatedSvd pod_svd(const Matrix& Y, Index max_k);

/// Ridge-regularized quadratic correction fit.  Z (r x n_s) are reduced
/// coordinates, R (n x n_s) the residuals to explain; solves
///
///   Vbar = R W^T (W W^T + gamma I)^{-1},  W = kron_nr applied column-wise,
///
/// via a Cholesky factorization of the symmetric positive (semi)definite
/// normal matrix.  gamma = 0 with rank-deficient W raises NumericalError
/// advising a positive gamma.
Matrix fit_vbar(const Matrix& Z, const Matrix& R, double gamma);

/// Fit everything a mapping of the given kind needs.  Position residuals are
/// (I - Phi Phi^T) Q, fitted against Phi^T Q with ridge gamma_q; bq adds the
/// momentum analogue with gamma_p.  qmcl and bq share Phi and Vbar_q by
/// construction.
ReductionBasis fit_bases(const SnapshotSet& snapshots, Index r, BasisKind kind,
                         double gamma_q, double gamma_p);

/// Same, reusing a precomputed extended_svd result (its U must have at least
/// r columns); studies sweep many r from one decomposition.
ReductionBasis fit_bases_from_svd(const SnapshotSet& snapshots, const TruncatedSvd& svd,
                                  Index r, BasisKind kind, double gamma_q, double gamma_p);

namespace detail {

/// Override the flop threshold above which extended_svd / pod_svd switch
/// from the dense Gram eigendecomposition to blocked subspace iteration.
/// Returns the previous threshold.  Intended for tests that want to force
/// one path at small problem sizes; production code keeps the default.
double set_dense_gram_flop_limit(double limit);

} // namespace detail

} // namespace sympmor
