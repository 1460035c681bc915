#include "sympmor/mapping.hpp"

#include "sympmor/kronecker.hpp"

#include <string>

namespace sympmor {

namespace {

void validate_block(const Matrix& Vbar, Index n, Index r, const char* name) {
    if (Vbar.rows() != n || Vbar.cols() != kron_dim(r)) {
        throw ConfigError(std::string("mapping: ") + name + " must be " + std::to_string(n) +
                          "x" + std::to_string(kron_dim(r)) + ", got " +
                          std::to_string(Vbar.rows()) + "x" + std::to_string(Vbar.cols()));
    }
}

void require_reduced_state(const Vector& z, Index r) {
    if (z.size() != 2 * r) {
        throw ConfigError("mapping: reduced state has length " + std::to_string(z.size()) +
                          ", expected " + std::to_string(2 * r));
    }
}

} // namespace

Mapping::Mapping(ReductionBasis basis, PartitionedState y_ref)
    : basis_(std::move(basis)), ref_(std::move(y_ref)) {
    const Index n = basis_.n();
    const Index r = basis_.r();
    if (n == 0 || r == 0) throw ConfigError("mapping: empty basis");
    if (ref_.half_dim() != n) {
        throw ConfigError("mapping: reference state dimension " +
                          std::to_string(ref_.half_dim()) + " does not match basis rows " +
                          std::to_string(n));
    }
    switch (basis_.kind) {
        case BasisKind::lsl:
            break;
        case BasisKind::qmcl:
            validate_block(basis_.Vbar_q, n, r, "Vbar_q");
            break;
        case BasisKind::bq:
            validate_block(basis_.Vbar_q, n, r, "Vbar_q");
            validate_block(basis_.Vbar_p, n, r, "Vbar_p");
            break;
    }
    if (basis_.kind == BasisKind::qmcl) {
        gram_q_.noalias() = basis_.Vbar_q.transpose() * basis_.Vbar_q;
    }
}

QmclPoint qmcl_point(const Mapping& m, const Vector& z) {
    if (m.kind() != BasisKind::qmcl) {
        throw ConfigError("mapping: qmcl point requested from a non-qmcl mapping");
    }
    const Index r = m.r();
    require_reduced_state(z, r);

    QmclPoint pt;
    pt.qt = z.head(r);
    pt.pt = z.tail(r);
    pt.B = kron_nr_jacobian(pt.qt);
    pt.GB = times_kron_jacobian(m.gram_q(), pt.qt);
    pt.M.noalias() = pt.B.transpose() * pt.GB;
    pt.M.diagonal().array() += 1.0;
    pt.M_llt.compute(pt.M);
    if (pt.M_llt.info() != Eigen::Success) {
        // M = I + B^T G B is SPD by construction; failure means NaNs upstream.
        throw NumericalError("mapping: metric factorization failed (non-finite state?)");
    }
    pt.vt = pt.M_llt.solve(pt.pt);

    // Derivatives: dM/dq_k = S_k + S_k^T with S_k = (dB/dq_k)^T (G B).
    // Column k of Dv is -M^{-1} (dM/dq_k) vt; column k of K is
    // (dB/dq_k) vt + B Dv_k.
    const Vector gbv = pt.GB * pt.vt; // row(i,j) entries used by S_k vt
    Matrix T(r, r);                   // T.col(k) = (dM/dq_k) vt
    Matrix dBv(kron_dim(r), r);       // dBv.col(k) = (dB/dq_k) vt
    for (Index k = 0; k < r; ++k) {
        // S_k vt: row l picks the (min(k,l), max(k,l)) entry of GB vt,
        // doubled on the diagonal pair.
        Vector w1(r);
        for (Index l = 0; l < r; ++l) {
            const Index row = (l < k) ? kron_index(l, k, r) : kron_index(k, l, r);
            w1(l) = (l == k ? 2.0 : 1.0) * gbv(row);
        }
        Vector bk = Vector::Zero(kron_dim(r));
        kron_db_apply(k, pt.vt, bk);
        dBv.col(k) = bk;
        // S_k^T vt = (GB)^T (dB/dq_k) vt.
        T.col(k) = w1 + pt.GB.transpose() * bk;
    }
    pt.Dv = -pt.M_llt.solve(T);
    pt.K = dBv + pt.B * pt.Dv;
    return pt;
}

PartitionedState decode(const Mapping& m, const Vector& z) {
    const Index r = m.r();
    require_reduced_state(z, r);
    const auto& b = m.basis();
    const auto qt = z.head(r);
    const auto pt = z.tail(r);

    PartitionedState y;
    y.q = m.reference().q + b.Phi * qt;
    switch (m.kind()) {
        case BasisKind::lsl:
            y.p = m.reference().p + b.Phi * pt;
            break;
        case BasisKind::bq:
            y.q += b.Vbar_q * kron_nr(qt);
            y.p = m.reference().p + b.Phi * pt + b.Vbar_p * kron_nr(pt);
            break;
        case BasisKind::qmcl: {
            y.q += b.Vbar_q * kron_nr(qt);
            // p = p_ref + (Phi + Vbar_q B) vt with vt = M^{-1} pt.
            const Matrix B = kron_nr_jacobian(qt);
            Matrix M = B.transpose() * times_kron_jacobian(m.gram_q(), qt);
            M.diagonal().array() += 1.0;
            Eigen::LLT<Matrix> llt(M);
            const Vector vt = llt.solve(pt);
            y.p = m.reference().p + b.Phi * vt + b.Vbar_q * (B * vt);
            break;
        }
    }
    return y;
}

Vector encode(const Mapping& m, const PartitionedState& y) {
    const Index n = m.n();
    const Index r = m.r();
    detail::require_size(y.q, n, "mapping encode position");
    detail::require_size(y.p, n, "mapping encode momentum");
    const auto& b = m.basis();

    Vector z(2 * r);
    const Vector dq = y.q - m.reference().q;
    const Vector dp = y.p - m.reference().p;
    z.head(r).noalias() = b.Phi.transpose() * dq;
    if (m.kind() == BasisKind::qmcl) {
        // Cotangent pairing: pt = DGamma_q(qt)^T (p - p_ref).
        const Matrix B = kron_nr_jacobian(Vector(z.head(r)));
        z.tail(r).noalias() = b.Phi.transpose() * dp;
        z.tail(r).noalias() += B.transpose() * (b.Vbar_q.transpose() * dp);
    } else {
        z.tail(r).noalias() = b.Phi.transpose() * dp;
    }
    return z;
}

Matrix jacobian(const Mapping& m, const Vector& z) {
    const Index n = m.n();
    const Index r = m.r();
    require_reduced_state(z, r);
    const auto& b = m.basis();

    Matrix J = Matrix::Zero(2 * n, 2 * r);
    switch (m.kind()) {
        case BasisKind::lsl:
            J.topLeftCorner(n, r) = b.Phi;
            J.bottomRightCorner(n, r) = b.Phi;
            break;
        case BasisKind::bq:
            J.topLeftCorner(n, r) = b.Phi + times_kron_jacobian(b.Vbar_q, Vector(z.head(r)));
            J.bottomRightCorner(n, r) = b.Phi + times_kron_jacobian(b.Vbar_p, Vector(z.tail(r)));
            break;
        case BasisKind::qmcl: {
            const QmclPoint pt = qmcl_point(m, z);
            const Matrix DGq = b.Phi + times_kron_jacobian(b.Vbar_q, pt.qt);
            J.topLeftCorner(n, r) = DGq;
            // dGamma_p/dqt = Phi Dv + Vbar_q K;  dGamma_p/dpt = DGamma_q M^{-1}.
            J.bottomLeftCorner(n, r) = b.Phi * pt.Dv + b.Vbar_q * pt.K;
            J.bottomRightCorner(n, r) = pt.M_llt.solve(DGq.transpose()).transpose();
            break;
        }
    }
    return J;
}

Vector symplectic_inverse_apply(const Mapping& m, const Vector& z, const Vector& w) {
    const Index n = m.n();
    const Index r = m.r();
    require_reduced_state(z, r);
    detail::require_size(w, 2 * n, "mapping symplectic inverse argument");
    const auto& b = m.basis();

    // J_{2r}^T DGamma^T J_{2n} w, evaluated blockwise: with a = w_p,
    // c = -w_q (the blocks of J_{2n} w) and DGamma = [[Dq, 0], [E, F]],
    //   DGamma^T (a, c) = (Dq^T a + E^T c, F^T c),
    //   J_{2r}^T (u, v) = (-v, u).
    const auto w_q = w.head(n);
    const auto w_p = w.tail(n);

    Vector u(r), v(r);
    switch (m.kind()) {
        case BasisKind::lsl:
            u.noalias() = b.Phi.transpose() * w_p;
            v.noalias() = -(b.Phi.transpose() * w_q);
            break;
        case BasisKind::bq: {
            const Matrix Dq = b.Phi + times_kron_jacobian(b.Vbar_q, Vector(z.head(r)));
            const Matrix Dp = b.Phi + times_kron_jacobian(b.Vbar_p, Vector(z.tail(r)));
            u.noalias() = Dq.transpose() * w_p;
            v.noalias() = -(Dp.transpose() * w_q);
            break;
        }
        case BasisKind::qmcl: {
            const QmclPoint pt = qmcl_point(m, z);
            const Matrix DGq = b.Phi + times_kron_jacobian(b.Vbar_q, pt.qt);
            // E = Phi Dv + Vbar_q K applied transposed without forming it.
            Vector Et_c = pt.Dv.transpose() * (b.Phi.transpose() * w_q) +
                          pt.K.transpose() * (b.Vbar_q.transpose() * w_q);
            u.noalias() = DGq.transpose() * w_p;
            u -= Et_c;
            v = -pt.M_llt.solve(DGq.transpose() * w_q);
            break;
        }
    }

    Vector out(2 * r);
    out.head(r) = -v;
    out.tail(r) = u;
    return out;
}

Matrix decode_columns(const Mapping& m, const Matrix& Z) {
    const Index n = m.n();
    const Index r = m.r();
    if (Z.rows() != 2 * r) {
        throw ConfigError("mapping: reduced states have " + std::to_string(Z.rows()) +
                          " rows, expected " + std::to_string(2 * r));
    }
    const Index cols = Z.cols();
    const auto& b = m.basis();
    const Matrix Zq = Z.topRows(r);
    const Matrix Zp = Z.bottomRows(r);

    Matrix Y(2 * n, cols);
    Y.topRows(n).noalias() = b.Phi * Zq;
    switch (m.kind()) {
        case BasisKind::lsl:
            Y.bottomRows(n).noalias() = b.Phi * Zp;
            break;
        case BasisKind::bq:
            Y.topRows(n).noalias() += b.Vbar_q * kron_nr_columns(Zq);
            Y.bottomRows(n).noalias() = b.Phi * Zp;
            Y.bottomRows(n).noalias() += b.Vbar_p * kron_nr_columns(Zp);
            break;
        case BasisKind::qmcl: {
            Y.topRows(n).noalias() += b.Vbar_q * kron_nr_columns(Zq);
            // Collect vt and B vt per column, then reconstruct with two
            // matrix products.
            Matrix Vt(r, cols);
            Matrix E(kron_dim(r), cols);
            for (Index c = 0; c < cols; ++c) {
                const Vector qt = Zq.col(c);
                const Matrix B = kron_nr_jacobian(qt);
                Matrix M = B.transpose() * times_kron_jacobian(m.gram_q(), qt);
                M.diagonal().array() += 1.0;
                Eigen::LLT<Matrix> llt(M);
                Vt.col(c) = llt.solve(Vector(Zp.col(c)));
                E.col(c).noalias() = B * Vt.col(c);
            }
            Y.bottomRows(n).noalias() = b.Phi * Vt;
            Y.bottomRows(n).noalias() += b.Vbar_q * E;
            break;
        }
    }
    Y.topRows(n).colwise() += m.reference().q;
    Y.bottomRows(n).colwise() += m.reference().p;
    return Y;
}

Vector JointQuadraticMap::decode(const Vector& z) const {
    if (V.cols() != z.size()) {
        throw ConfigError("joint quadratic map: reduced state has length " +
                          std::to_string(z.size()) + ", expected " + std::to_string(V.cols()));
    }
    return y_ref + V * z + Vbar * kron_nr(z);
}

Matrix JointQuadraticMap::decode_columns(const Matrix& Z) const {
    if (V.cols() != Z.rows()) {
        throw ConfigError("joint quadratic map: reduced states have " +
                          std::to_string(Z.rows()) + " rows, expected " +
                          std::to_string(V.cols()));
    }
    Matrix Y = V * Z + Vbar * kron_nr_columns(Z);
    Y.colwise() += y_ref;
    return Y;
}

} // namespace sympmor
