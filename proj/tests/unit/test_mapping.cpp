#include "doctest.h"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

using namespace sympmor;

namespace {

/// Mapping with a random orthonormal linear part and complement-projected
/// quadratic corrections, the shape every fitted basis guarantees.
Mapping random_mapping(BasisKind kind, Index n, Index r, std::mt19937_64& gen,
                       double vbar_scale = 1.0, bool zero_ref = false) {
    ReductionBasis basis;
    basis.kind = kind;
    basis.Phi = testsup::random_orthonormal(n, r, gen);
    if (kind == BasisKind::qmcl || kind == BasisKind::bq) {
        basis.Vbar_q = vbar_scale * testsup::random_vbar(basis.Phi, gen);
    }
    if (kind == BasisKind::bq) {
        basis.Vbar_p = vbar_scale * testsup::random_vbar(basis.Phi, gen);
    }
    PartitionedState ref(Vector::Zero(n), Vector::Zero(n));
    if (!zero_ref) {
        ref.q = testsup::random_vector(n, gen);
        ref.p = testsup::random_vector(n, gen);
    }
    return Mapping(std::move(basis), std::move(ref));
}

Matrix fd_jacobian(const Mapping& m, const Vector& z, double h = 1e-6) {
    Matrix J(2 * m.n(), z.size());
    for (Index k = 0; k < z.size(); ++k) {
        Vector zp = z, zm = z;
        zp(k) += h;
        zm(k) -= h;
        J.col(k) = (decode(m, zp).to_full() - decode(m, zm).to_full()) / (2.0 * h);
    }
    return J;
}

} // namespace

TEST_SUITE("mapping") {

TEST_CASE("decoding the origin gives the reference state exactly") {
    std::mt19937_64 gen(11);
    for (BasisKind kind : {BasisKind::lsl, BasisKind::bq, BasisKind::qmcl}) {
        const Mapping m = random_mapping(kind, 14, 3, gen);
        const PartitionedState y = decode(m, Vector::Zero(6));
        CHECK((y.q - m.reference().q).norm() == 0.0);
        CHECK((y.p - m.reference().p).norm() == 0.0);
        // ... and encoding the reference gives the origin back.
        CHECK(encode(m, m.reference()).norm() == 0.0);
    }
}

TEST_CASE("linear-part decode is affine-linear in the reduced state") {
    std::mt19937_64 gen(12);
    const Mapping m = random_mapping(BasisKind::lsl, 20, 4, gen);
    const Vector z1 = testsup::random_vector(8, gen);
    const Vector z2 = testsup::random_vector(8, gen);
    const Vector ref = m.reference().to_full();

    const Vector lhs = decode(m, Vector(2.0 * z1 - 3.0 * z2)).to_full() - ref;
    const Vector rhs = 2.0 * (decode(m, z1).to_full() - ref) -
                       3.0 * (decode(m, z2).to_full() - ref);
    CHECK((lhs - rhs).norm() < 1e-13 * (1.0 + rhs.norm()));
}

TEST_CASE("quadratic decode matches its defining formula") {
    std::mt19937_64 gen(13);
    const Index n = 15, r = 3;
    const Mapping m = random_mapping(BasisKind::bq, n, r, gen);
    const Vector z = testsup::random_vector(2 * r, gen);
    const Vector qt = z.head(r), pt = z.tail(r);

    const PartitionedState y = decode(m, z);
    const Vector q_ref = m.reference().q, p_ref = m.reference().p;
    const Matrix& Phi = m.basis().Phi;
    const Vector q_expect = q_ref + Phi * qt + m.basis().Vbar_q * kron_nr(qt);
    const Vector p_expect = p_ref + Phi * pt + m.basis().Vbar_p * kron_nr(pt);
    CHECK((y.q - q_expect).norm() < 1e-13 * (1.0 + q_expect.norm()));
    CHECK((y.p - p_expect).norm() < 1e-13 * (1.0 + p_expect.norm()));
}

TEST_CASE("cotangent-lifted momentum block is the Moore-Penrose reconstruction") {
    std::mt19937_64 gen(14);
    const Index n = 10, r = 3;
    const Mapping m = random_mapping(BasisKind::qmcl, n, r, gen);
    const Vector z = testsup::random_vector(2 * r, gen);
    const Vector qt = z.head(r), pt = z.tail(r);

    // A = DGamma_q(qt) = Phi + Vbar_q B(qt); p = p_ref + A (A^T A)^{-1} pt.
    const Matrix A = m.basis().Phi + m.basis().Vbar_q * kron_nr_jacobian(qt);
    const Matrix AtA = A.transpose() * A;
    const Vector p_expect = m.reference().p + A * AtA.ldlt().solve(pt);
    CHECK((decode(m, z).p - p_expect).norm() < 1e-10 * (1.0 + p_expect.norm()));
}

TEST_CASE("qmcl with a zero correction degenerates to the linear map") {
    std::mt19937_64 gen(15);
    const Index n = 12, r = 3;
    ReductionBasis lin;
    lin.kind = BasisKind::lsl;
    lin.Phi = testsup::random_orthonormal(n, r, gen);
    ReductionBasis quad;
    quad.kind = BasisKind::qmcl;
    quad.Phi = lin.Phi;
    quad.Vbar_q = Matrix::Zero(n, kron_dim(r));
    const PartitionedState ref(testsup::random_vector(n, gen), testsup::random_vector(n, gen));
    const Mapping m_lin(lin, ref), m_quad(quad, ref);

    const Vector z = testsup::random_vector(2 * r, gen);
    CHECK((decode(m_quad, z).to_full() - decode(m_lin, z).to_full()).norm() < 1e-12);

    // The Jacobian collapses to blkdiag(Phi, Phi).
    Matrix blk = Matrix::Zero(2 * n, 2 * r);
    blk.topLeftCorner(n, r) = lin.Phi;
    blk.bottomRightCorner(n, r) = lin.Phi;
    CHECK((jacobian(m_quad, z) - blk).norm() < 1e-12);
    CHECK((jacobian(m_lin, z) - blk).norm() == 0.0);
}

TEST_CASE("encode inverts decode on the manifold") {
    std::mt19937_64 gen(16);
    for (BasisKind kind : {BasisKind::lsl, BasisKind::bq, BasisKind::qmcl}) {
        const Mapping m = random_mapping(kind, 18, 4, gen, 0.8);
        for (int trial = 0; trial < 5; ++trial) {
            const Vector z = testsup::random_vector(8, gen);
            const Vector z_back = encode(m, decode(m, z));
            CHECK((z_back - z).norm() < 1e-10 * (1.0 + z.norm()));
        }
    }
}

TEST_CASE("jacobians match central finite differences") {
    std::mt19937_64 gen(17);
    for (BasisKind kind : {BasisKind::bq, BasisKind::qmcl}) {
        const Mapping m = random_mapping(kind, 11, 3, gen, 0.7);
        const Vector z = testsup::random_vector(6, gen, 0.8);
        const Matrix J = jacobian(m, z);
        const Matrix J_fd = fd_jacobian(m, z);
        CHECK((J - J_fd).norm() < 2e-6 * (1.0 + J.norm()));
    }
}

TEST_CASE("qmcl point internals: Gram cache, SPD metric, derivative blocks") {
    std::mt19937_64 gen(18);
    const Index n = 13, r = 3;
    const Mapping m = random_mapping(BasisKind::qmcl, n, r, gen);
    CHECK((m.gram_q() - Matrix(m.basis().Vbar_q.transpose() * m.basis().Vbar_q)).norm() <
          1e-13 * (1.0 + m.gram_q().norm()));

    const Vector z = testsup::random_vector(2 * r, gen, 0.9);
    const QmclPoint pt = qmcl_point(m, z);

    CHECK((pt.B - kron_nr_jacobian(pt.qt)).norm() == 0.0);
    const Matrix M_expect =
        Matrix::Identity(r, r) + pt.B.transpose() * m.gram_q() * pt.B;
    CHECK((pt.M - M_expect).norm() < 1e-12 * (1.0 + M_expect.norm()));
    CHECK((pt.M * pt.vt - pt.pt).norm() < 1e-11 * (1.0 + pt.pt.norm()));

    // M = I + B^T G B >= I: its smallest eigenvalue cannot drop below one.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(pt.M);
    REQUIRE(eig.info() == Eigen::Success);
    CHECK(eig.eigenvalues()(0) >= 1.0 - 1e-10);

    // Dv against central differences of vt(qt) = M(qt)^{-1} pt.
    const double h = 1e-6;
    for (Index k = 0; k < r; ++k) {
        Vector zp = z, zm = z;
        zp(k) += h;
        zm(k) -= h;
        const Vector dv_fd =
            (qmcl_point(m, zp).vt - qmcl_point(m, zm).vt) / (2.0 * h);
        CHECK((pt.Dv.col(k) - dv_fd).norm() < 1e-7 * (1.0 + dv_fd.norm()));
        const Vector K_fd = (qmcl_point(m, zp).B * qmcl_point(m, zp).vt -
                             qmcl_point(m, zm).B * qmcl_point(m, zm).vt) /
                            (2.0 * h);
        CHECK((pt.K.col(k) - K_fd).norm() < 1e-7 * (1.0 + K_fd.norm()));
    }

    CHECK_THROWS_AS(qmcl_point(random_mapping(BasisKind::lsl, n, r, gen), z), ConfigError);
}

TEST_CASE("the cotangent-lifted quadratic map is symplectic everywhere") {
    std::mt19937_64 gen(19);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index r = 2 + trial % 3; // r in {2, 3, 4}
        const Index n = 8 + trial % 5;
        const Mapping m = random_mapping(BasisKind::qmcl, n, r, gen, 1.0);
        const Vector z = testsup::random_vector(2 * r, gen);
        const Matrix DG = jacobian(m, z);
        const Matrix defect = DG.transpose() * testsup::apply_canonical_J(DG) -
                              testsup::canonical_J_dense(2 * r);
        worst = std::max(worst, defect.norm());
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("the decoupled quadratic map is measurably non-symplectic on fitted data") {
    auto fixture = testsup::make_wave_fixture();
    const Index r = 6;
    const ReductionBasis basis = fit_bases(fixture.snaps, r, BasisKind::bq, 1e-8, 1e-8);
    const Index n = fixture.snaps.half_dim();
    const Mapping m(basis, PartitionedState(Vector::Zero(n), Vector::Zero(n)));

    double max_defect = 0.0;
    const Index cols = fixture.snaps.num_cols();
    for (Index j : {Index(0), cols / 4, cols / 2, 3 * cols / 4, cols - 1}) {
        PartitionedState y(fixture.snaps.Q().col(j), fixture.snaps.P().col(j));
        const Vector z = encode(m, y);
        const Matrix DG = jacobian(m, z);
        const Matrix defect = DG.transpose() * testsup::apply_canonical_J(DG) -
                              testsup::canonical_J_dense(2 * r);
        max_defect = std::max(max_defect, defect.norm());
    }
    CHECK(max_defect > 1e-6);
}

TEST_CASE("symplectic inverse application avoids forming the Jacobian") {
    std::mt19937_64 gen(20);
    for (BasisKind kind : {BasisKind::lsl, BasisKind::bq, BasisKind::qmcl}) {
        const Index n = 12, r = 3;
        const Mapping m = random_mapping(kind, n, r, gen, 0.8);
        const Vector z = testsup::random_vector(2 * r, gen);
        const Vector w = testsup::random_vector(2 * n, gen);

        // Dense reference: J_2r^T DGamma^T J_2n w.
        const Matrix DG = jacobian(m, z);
        const Vector ref = testsup::canonical_J_dense(2 * r).transpose() *
                           (DG.transpose() * testsup::apply_canonical_J(Matrix(w)).col(0));
        const Vector fast = symplectic_inverse_apply(m, z, w);
        CHECK((fast - ref).norm() < 1e-12 * (1.0 + ref.norm()));

        CHECK(symplectic_inverse_apply(m, z, Vector::Zero(2 * n)).norm() == 0.0);

        if (kind == BasisKind::lsl) {
            Vector split(2 * r);
            split.head(r) = m.basis().Phi.transpose() * w.head(n);
            split.tail(r) = m.basis().Phi.transpose() * w.tail(n);
            CHECK((fast - split).norm() < 1e-13 * (1.0 + split.norm()));
        }
        if (kind == BasisKind::qmcl) {
            // Genuine left inverse: pseudo-inverting DGamma u returns u.
            const Vector u = testsup::random_vector(2 * r, gen);
            const Vector back = symplectic_inverse_apply(m, z, Vector(DG * u));
            CHECK((back - u).norm() < 1e-10 * (1.0 + u.norm()));
        }
    }
}

TEST_CASE("batch decode agrees with per-column decode") {
    std::mt19937_64 gen(21);
    for (BasisKind kind : {BasisKind::lsl, BasisKind::bq, BasisKind::qmcl}) {
        const Index n = 10, r = 3, cols = 9;
        const Mapping m = random_mapping(kind, n, r, gen, 0.6);
        const Matrix Z = testsup::random_matrix(2 * r, cols, gen);
        const Matrix batch = decode_columns(m, Z);
        REQUIRE(batch.rows() == 2 * n);
        REQUIRE(batch.cols() == cols);
        for (Index j = 0; j < cols; ++j) {
            const Vector one = decode(m, Z.col(j)).to_full();
            CHECK((batch.col(j) - one).norm() < 1e-12 * (1.0 + one.norm()));
        }
    }
}

TEST_CASE("joint quadratic map: formula, inversion, batch decode") {
    std::mt19937_64 gen(22);
    const Index two_n = 18, two_r = 4;
    JointQuadraticMap map;
    map.V = testsup::random_orthonormal(two_n, two_r, gen);
    map.Vbar = testsup::random_vbar(map.V, gen);
    map.y_ref = testsup::random_vector(two_n, gen);

    const Vector z = testsup::random_vector(two_r, gen);
    const Vector y = map.decode(z);
    const Vector y_expect = map.y_ref + map.V * z + map.Vbar * kron_nr(z);
    CHECK((y - y_expect).norm() < 1e-13 * (1.0 + y_expect.norm()));

    // V^T Vbar = 0 and V^T V = I make encode a left inverse on the manifold.
    CHECK((map.encode(y) - z).norm() < 1e-12 * (1.0 + z.norm()));

    const Matrix Z = testsup::random_matrix(two_r, 6, gen);
    const Matrix batch = map.decode_columns(Z);
    for (Index j = 0; j < 6; ++j) {
        CHECK((batch.col(j) - map.decode(Z.col(j))).norm() < 1e-12);
    }
}

TEST_CASE("mapping construction validates block shapes") {
    std::mt19937_64 gen(23);
    const Index n = 9, r = 3;
    ReductionBasis basis;
    basis.kind = BasisKind::qmcl;
    basis.Phi = testsup::random_orthonormal(n, r, gen);
    basis.Vbar_q = Matrix::Zero(n, kron_dim(r) + 1); // wrong column count
    const PartitionedState ref(Vector::Zero(n), Vector::Zero(n));
    CHECK_THROWS_AS(Mapping(basis, ref), ConfigError);

    basis.Vbar_q = Matrix::Zero(n + 1, kron_dim(r)); // wrong row count
    CHECK_THROWS_AS(Mapping(basis, ref), ConfigError);

    basis.Vbar_q = Matrix::Zero(n, kron_dim(r));
    CHECK_THROWS_AS(Mapping(basis, PartitionedState(Vector::Zero(n + 2), Vector::Zero(n + 2))),
                    ConfigError);
    CHECK_NOTHROW(Mapping(basis, ref));
}

} // TEST_SUITE("mapping")
