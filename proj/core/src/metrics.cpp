#include "sympmor/metrics.hpp"

#include "sympmor/kronecker.hpp"

#include <cmath>

namespace sympmor {

Decoder make_decoder(const Mapping& m) {
    return [m](const Matrix& Z) { return decode_columns(m, Z); };
}

Decoder make_decoder(const JointQuadraticMap& m) {
    return [m](const Matrix& Z) { return m.decode_columns(Z); };
}

ProjectionErrors projection_errors(const SnapshotSet& snapshots, const Mapping& m) {
    if (snapshots.half_dim() != m.n()) {
        throw ConfigError("projection error: snapshot dimension " +
                          std::to_string(snapshots.half_dim()) +
                          " does not match mapping dimension " + std::to_string(m.n()));
    }
    const Index n = m.n();
    const Index r = m.r();
    const auto& b = m.basis();

    ProjectionErrors err;
    for (const auto& blk : snapshots.parameters()) {
        const auto Qb = snapshots.Q_raw().middleCols(blk.col_offset, blk.num_cols);
        const auto Pb = snapshots.P_raw().middleCols(blk.col_offset, blk.num_cols);

        // Encode every column, then reconstruct blockwise.
        Matrix dQ = Qb.colwise() - m.reference().q;
        Matrix dP = Pb.colwise() - m.reference().p;
        Matrix Zq = b.Phi.transpose() * dQ;

        Matrix Qrec = b.Phi * Zq;
        if (m.kind() != BasisKind::lsl) {
            Qrec.noalias() += b.Vbar_q * kron_nr_columns(Zq);
        }
        Qrec.colwise() += m.reference().q;

        Matrix Prec(n, blk.num_cols);
        if (m.kind() == BasisKind::qmcl) {
            // pt = DGamma_q(qt)^T dp, then the momentum leg of the decoder.
            const Matrix U1 = b.Phi.transpose() * dP;
            const Matrix U2 = b.Vbar_q.transpose() * dP;
            Matrix Vt(r, blk.num_cols);
            Matrix E(kron_dim(r), blk.num_cols);
            for (Index c = 0; c < blk.num_cols; ++c) {
                const Vector qt = Zq.col(c);
                const Matrix B = kron_nr_jacobian(qt);
                const Vector pt = U1.col(c) + B.transpose() * U2.col(c);
                Matrix M = B.transpose() * times_kron_jacobian(m.gram_q(), qt);
                M.diagonal().array() += 1.0;
                Vt.col(c) = Eigen::LLT<Matrix>(M).solve(pt);
                E.col(c).noalias() = B * Vt.col(c);
            }
            Prec.noalias() = b.Phi * Vt;
            Prec.noalias() += b.Vbar_q * E;
        } else {
            Matrix Zp = b.Phi.transpose() * dP;
            Prec.noalias() = b.Phi * Zp;
            if (m.kind() == BasisKind::bq) {
                Prec.noalias() += b.Vbar_p * kron_nr_columns(Zp);
            }
        }
        Prec.colwise() += m.reference().p;

        // Relative squared Frobenius errors against the raw snapshots.
        err.q += (Qb - Qrec).squaredNorm() / Qb.squaredNorm();
        err.p += (Pb - Prec).squaredNorm() / Pb.squaredNorm();
    }
    const double M_count = static_cast<double>(snapshots.parameters().size());
    err.q /= M_count;
    err.p /= M_count;
    return err;
}

double relative_state_error(const Matrix& Y, const Matrix& Y_rec) {
    if (Y.rows() != Y_rec.rows() || Y.cols() != Y_rec.cols()) {
        throw ConfigError("state error: trajectory shapes differ");
    }
    return (Y - Y_rec).squaredNorm() / Y.squaredNorm();
}

double relative_state_error(const Matrix& Y, const Matrix& Z, const Decoder& decode) {
    return relative_state_error(Y, decode(Z));
}

Vector pointwise_state_error(const Matrix& Y, const Matrix& Y_rec) {
    if (Y.rows() != Y_rec.rows() || Y.cols() != Y_rec.cols()) {
        throw ConfigError("state error: trajectory shapes differ");
    }
    Vector e(Y.cols());
    for (Index c = 0; c < Y.cols(); ++c) {
        e(c) = (Y.col(c) - Y_rec.col(c)).squaredNorm() / Y.col(c).squaredNorm();
    }
    return e;
}

Vector energy_series(const Matrix& Y, const HamiltonianFOM& fom) {
    Vector h(Y.cols());
    for (Index c = 0; c < Y.cols(); ++c) h(c) = fom.energy(Vector(Y.col(c)));
    return h;
}

Vector hamiltonian_drift_series(const Matrix& Y_rec, const HamiltonianFOM& fom) {
    Vector h = energy_series(Y_rec, fom);
    return (h.array() - h(0)).abs();
}

Vector hamiltonian_mismatch_series(const Matrix& Y_rec, const Matrix& Y_fom,
                                   const HamiltonianFOM& fom) {
    if (Y_rec.cols() != Y_fom.cols()) {
        throw ConfigError("energy mismatch: trajectory lengths differ");
    }
    Vector h_rec = energy_series(Y_rec, fom);
    Vector h_fom = energy_series(Y_fom, fom);
    return (h_rec - h_fom).cwiseAbs();
}

void StateErrorAccumulator::add(const Vector& y_ref_state, const Vector& y_approx) {
    const double diff = (y_ref_state - y_approx).squaredNorm();
    const double ref = y_ref_state.squaredNorm();
    num_ += diff;
    den_ += ref;
    pointwise_.push_back(ref > 0.0 ? diff / ref : diff);
}

double StateErrorAccumulator::value() const {
    return den_ > 0.0 ? num_ / den_ : num_;
}

Vector StateErrorAccumulator::pointwise() const {
    return Eigen::Map<const Vector>(pointwise_.data(), static_cast<Index>(pointwise_.size()));
}

} // namespace sympmor
