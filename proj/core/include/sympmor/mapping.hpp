#pragma once

#include "sympmor/basis.hpp"
#include "sympmor/types.hpp"

#include <Eigen/Cholesky>

namespace sympmor {

/// State approximation Gamma: R^{2r} -> R^{2n} built from a fitted basis and
/// a reference state.  The three kinds are
///
///   lsl   q = q_ref + Phi qt,              p = p_ref + Phi pt
///   bq    q = q_ref + Phi qt + Vbar_q (qt (x) qt),
///         p = p_ref + Phi pt + Vbar_p (pt (x) pt)
///   qmcl  q = q_ref + Phi qt + Vbar_q (qt (x) qt),
///         p = p_ref + DGamma_q(qt) M(qt)^{-1} pt,
///
/// with DGamma_q(qt) = Phi + Vbar_q B(qt) and M(qt) = I + B^T G B,
/// G = Vbar_q^T Vbar_q.  The qmcl map is symplectic
/// (DGamma^T J_{2n} DGamma = J_{2r}); the others are not.
class Mapping {
public:
    Mapping() = default;
    Mapping(ReductionBasis basis, PartitionedState y_ref);

    BasisKind kind() const { return basis_.kind; }
    Index n() const { return basis_.n(); }
    Index r() const { return basis_.r(); }
    const ReductionBasis& basis() const { return basis_; }
    const PartitionedState& reference() const { return ref_; }

    /// Cached Gram matrix Vbar_q^T Vbar_q (qmcl only; empty otherwise).
    const Matrix& gram_q() const { return gram_q_; }

private:
    ReductionBasis basis_;
    PartitionedState ref_;
    Matrix gram_q_;
};

/// All qmcl quantities evaluated at one reduced state, shared by decode,
/// jacobian, and the reduced-model right-hand sides.
struct QmclPoint {
    Vector qt;          ///< reduced position
    Vector pt;          ///< reduced (cotangent-lifted) momentum
    Matrix B;           ///< kron Jacobian B(qt), d x r
    Matrix GB;          ///< G B, d x r
    Matrix M;           ///< I + B^T G B, r x r, SPD
    Eigen::LLT<Matrix> M_llt;
    Vector vt;          ///< M^{-1} pt

    /// dvt/dqt (r x r): column k is -M^{-1} (S_k + S_k^T) vt with
    /// S_k = (dB/dq_k)^T G B.
    Matrix Dv;
    /// d(B vt)/dqt (d x r): column k is (dB/dq_k) vt + B dvt/dq_k.
    Matrix K;

    Index r() const { return qt.size(); }
};

/// Evaluate the qmcl point (including Dv and K) at z = (qt, pt).
QmclPoint qmcl_point(const Mapping& m, const Vector& z);

/// Gamma(z): reduced state to full state.
PartitionedState decode(const Mapping& m, const Vector& z);

/// Reduced coordinates of a full state.  Positions always encode as
/// qt = Phi^T (q - q_ref); momenta as pt = Phi^T (p - p_ref) for lsl/bq and
/// as the cotangent pairing pt = DGamma_q(qt)^T (p - p_ref) for qmcl.
Vector encode(const Mapping& m, const PartitionedState& y);

/// Decode many reduced states at once (columns of Z); the heavy n-sized
/// reconstructions run as a few matrix products instead of per-column BLAS-1
/// sweeps.  Equivalent to decoding column by column up to the associativity
/// of the underlying matrix kernels.
Matrix decode_columns(const Mapping& m, const Matrix& Z);

/// Dense Jacobian DGamma(z), 2n x 2r.
Matrix jacobian(const Mapping& m, const Vector& z);

/// Apply the symplectic inverse of the Jacobian:
///   (DGamma(z))^+ w = J_{2r}^T DGamma(z)^T J_{2n} w,
/// without forming DGamma.  For qmcl this is a genuine left inverse.
Vector symplectic_inverse_apply(const Mapping& m, const Vector& z, const Vector& w);

// ---------------------------------------------------------------------------
// Joint quadratic map on full phase space, y = y_ref + V z + Vbar (z (x) z)
// with V spanning both blocks (used by the non-structured POD baseline).
// ---------------------------------------------------------------------------

struct JointQuadraticMap {
    Matrix V;     ///< 2n x 2r
    Matrix Vbar;  ///< 2n x r(2r+1)
    Vector y_ref; ///< 2n

    Vector decode(const Vector& z) const;
    Matrix decode_columns(const Matrix& Z) const;
    Vector encode(const Vector& y) const { return V.transpose() * (y - y_ref); }
};

} // namespace sympmor
