#include "doctest.h"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <vector>

using namespace sympmor;
using testsup::FlopLimitGuard;
using testsup::TempDir;

namespace {

/// Reference SVD for small dense problems, with the same largest-entry sign
/// convention the library applies.
struct DenseSvdRef {
    Matrix U;
    Vector sigma;
};

DenseSvdRef jacobi_svd_ref(const Matrix& Y) {
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU);
    DenseSvdRef ref{svd.matrixU(), svd.singularValues()};
    for (Index c = 0; c < ref.U.cols(); ++c) {
        Index idx = 0;
        ref.U.col(c).cwiseAbs().maxCoeff(&idx);
        if (ref.U(idx, c) < 0.0) ref.U.col(c) = -ref.U.col(c);
    }
    return ref;
}

SnapshotSet wrap_snapshots(const Matrix& Q, const Matrix& P, double momentum_scale = 1.0) {
    std::vector<ParameterBlock> blocks(1);
    blocks[0].mu = Vector::Constant(1, 1.0);
    blocks[0].num_cols = Q.cols();
    blocks[0].col_offset = 0;
    const PartitionedState ref(Vector::Zero(Q.rows()), Vector::Zero(Q.rows()));
    return SnapshotSet(Q, P, ref, ReferenceKind::zero, blocks, momentum_scale);
}

/// Matrix with prescribed singular values and random orthonormal factors.
Matrix planted_spectrum(Index rows, Index cols, const Vector& sigma, std::mt19937_64& gen) {
    const Index k = sigma.size();
    const Matrix U = testsup::random_orthonormal(rows, k, gen);
    const Matrix V = testsup::random_orthonormal(cols, k, gen);
    return U * sigma.asDiagonal() * V.transpose();
}

} // namespace

TEST_SUITE("basis") {

TEST_CASE("rank-one snapshots give the normalized column with a fixed sign") {
    Vector c(3);
    c << 1.0, -3.0, 2.0;
    Matrix Q(3, 3);
    Q << c, c, c;
    const SnapshotSet snaps = wrap_snapshots(Q, Matrix::Zero(3, 3));

    const TruncatedSvd svd = extended_svd(snaps, 1);
    CHECK(svd.numerical_rank == 1);
    // Largest-magnitude entry of c is negative, so the stored mode is -c/|c|.
    const Vector expected = -c / c.norm();
    CHECK((svd.U.col(0) - expected).norm() < 1e-14);
    // Three identical columns (momentum block is zero): sigma_1 = |c| sqrt(3).
    CHECK(svd.sigma(0) == doctest::Approx(c.norm() * std::sqrt(3.0)).epsilon(1e-13));

    SUBCASE("asking beyond the numerical rank is an error naming the rank") {
        CHECK_THROWS_WITH_AS(extended_svd(snaps, 2), doctest::Contains("rank"), NumericalError);
    }
}

TEST_CASE("extended SVD matches a dense Jacobi SVD of the extended matrix") {
    std::mt19937_64 gen(2024);
    const Index n = 8, cols = 6;
    const Matrix Q = testsup::random_matrix(n, cols, gen);
    const Matrix P = testsup::random_matrix(n, cols, gen);
    const SnapshotSet snaps = wrap_snapshots(Q, P, 1.7);

    const DenseSvdRef ref = jacobi_svd_ref(snaps.extended_matrix());
    const TruncatedSvd svd = extended_svd(snaps, n);

    REQUIRE(svd.U.cols() >= n);
    for (Index c = 0; c < n; ++c) {
        CHECK((svd.U.col(c) - ref.U.col(c)).norm() < 1e-8);
        CHECK(testsup::rel_diff(svd.sigma(c), ref.sigma(c)) < 1e-10);
    }

    SUBCASE("the same spectrum comes out of the Gram eigenproblem") {
        const Matrix Y = snaps.extended_matrix();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(Y * Y.transpose()));
        REQUIRE(eig.info() == Eigen::Success);
        for (Index c = 0; c < n; ++c) {
            const double lambda = eig.eigenvalues()(n - 1 - c); // ascending -> descending
            CHECK(testsup::rel_diff(svd.sigma(c) * svd.sigma(c), lambda) < 1e-8);
        }
    }
}

TEST_CASE("truncation error satisfies the Eckart-Young identity") {
    std::mt19937_64 gen(77);
    const Index n = 10, cols = 14;
    const Matrix Q = testsup::random_matrix(n, cols, gen);
    const Matrix P = testsup::random_matrix(n, cols, gen);
    const SnapshotSet snaps = wrap_snapshots(Q, P);
    const Matrix Y = snaps.extended_matrix();
    const Vector sigma = jacobi_svd_ref(Y).sigma;

    for (Index r : {2, 4, 7}) {
        const Matrix Phi = cotangent_lift(snaps, r);
        const double err2 = (Y - Phi * (Phi.transpose() * Y)).squaredNorm();
        const double tail2 = sigma.tail(sigma.size() - r).squaredNorm();
        CHECK(testsup::rel_diff(err2, tail2) < 1e-8);
    }
}

TEST_CASE("cotangent lift is orthonormal and its block-diagonal map is symplectic") {
    auto fixture = testsup::make_wave_fixture();
    const Index n = fixture.snaps.half_dim();
    const Index r = 6;
    const Matrix Phi = cotangent_lift(fixture.snaps, r);

    REQUIRE(Phi.rows() == n);
    REQUIRE(Phi.cols() == r);
    CHECK((Phi.transpose() * Phi - Matrix::Identity(r, r)).norm() < 1e-10);

    // V = blkdiag(Phi, Phi) must satisfy V^T J_2n V = J_2r.
    Matrix V = Matrix::Zero(2 * n, 2 * r);
    V.topLeftCorner(n, r) = Phi;
    V.bottomRightCorner(n, r) = Phi;
    const Matrix defect =
        V.transpose() * testsup::apply_canonical_J(V) - testsup::canonical_J_dense(2 * r);
    CHECK(defect.norm() < 1e-10);
}

TEST_CASE("momentum scale feeds the lift through the extended matrix") {
    std::mt19937_64 gen(404);
    const Matrix Q = testsup::random_matrix(9, 5, gen);
    const Matrix P = testsup::random_matrix(9, 5, gen);
    const SnapshotSet snaps = wrap_snapshots(Q, P, 3.5);

    const Matrix Phi = cotangent_lift(snaps, 4);
    const TruncatedSvd pod = pod_svd(snaps.extended_matrix(), 4);
    CHECK((Phi - pod.U.leftCols(4)).norm() < 1e-10);
}

TEST_CASE("POD handles tall and wide matrices through the smaller Gram side") {
    std::mt19937_64 gen(99);
    for (auto [rows, cols] : {std::pair<Index, Index>{30, 12}, {12, 30}}) {
        const Matrix Y = testsup::random_matrix(rows, cols, gen);
        const Index k = std::min(rows, cols) - 2;
        const TruncatedSvd pod = pod_svd(Y, k);
        const DenseSvdRef ref = jacobi_svd_ref(Y);
        for (Index c = 0; c < k; ++c) {
            CHECK((pod.U.col(c) - ref.U.col(c)).norm() < 1e-8);
            CHECK(testsup::rel_diff(pod.sigma(c), ref.sigma(c)) < 1e-10);
        }
    }
}

TEST_CASE("blocked subspace iteration agrees with the dense Gram path") {
    std::mt19937_64 gen(512);
    Vector sigma(10);
    for (Index i = 0; i < 10; ++i) sigma(i) = 12.0 * std::pow(0.55, static_cast<double>(i));
    const Matrix Y = planted_spectrum(40, 28, sigma, gen);

    const Index k = 6;
    const TruncatedSvd dense = pod_svd(Y, k);
    FlopLimitGuard force_iterative(0.0);
    const TruncatedSvd iter = pod_svd(Y, k);

    for (Index c = 0; c < k; ++c) {
        CHECK(testsup::rel_diff(iter.sigma(c), dense.sigma(c)) < 1e-9);
        CHECK((iter.U.col(c) - dense.U.col(c)).norm() < 2e-7);
    }

    SUBCASE("the extended lift takes the same detour") {
        const Matrix Q = planted_spectrum(24, 10, sigma.head(6), gen);
        const Matrix P = planted_spectrum(24, 10, sigma.head(6), gen);
        const SnapshotSet snaps = wrap_snapshots(Q, P);
        FlopLimitGuard back_to_dense(1e11);
        const TruncatedSvd a = extended_svd(snaps, 5);
        FlopLimitGuard iterate(0.0);
        const TruncatedSvd b = extended_svd(snaps, 5);
        for (Index c = 0; c < 5; ++c) {
            CHECK(testsup::rel_diff(a.sigma(c), b.sigma(c)) < 1e-9);
            CHECK((a.U.col(c) - b.U.col(c)).norm() < 2e-7);
        }
    }
}

TEST_CASE("ridge fit solves the normal equations") {
    std::mt19937_64 gen(31337);
    const Index r = 3, n = 12, ns = 20;
    const Index d = kron_dim(r);

    SUBCASE("a planted quadratic correction is recovered exactly at gamma = 0") {
        const Matrix Z = testsup::random_matrix(r, ns, gen);
        const Matrix W = kron_nr_columns(Z);
        const Matrix Vbar_true = testsup::random_matrix(n, d, gen);
        const Matrix R = Vbar_true * W;
        const Matrix Vbar = fit_vbar(Z, R, 0.0);
        CHECK(testsup::rel_diff(Vbar, Vbar_true) < 1e-8);
    }

    SUBCASE("zero residuals give a zero correction") {
        const Matrix Z = testsup::random_matrix(r, ns, gen);
        const Matrix Vbar = fit_vbar(Z, Matrix::Zero(n, ns), 0.5);
        CHECK(Vbar.norm() == 0.0);
        CHECK(Vbar.rows() == n);
        CHECK(Vbar.cols() == d);
    }

    SUBCASE("heavy regularization shrinks the fit toward zero") {
        const Matrix Z = testsup::random_matrix(r, ns, gen);
        const Matrix R = testsup::random_matrix(n, ns, gen);
        const Matrix Vbar = fit_vbar(Z, R, 1e12);
        CHECK(Vbar.norm() < 1e-6);
    }

    SUBCASE("any positive-gamma fit satisfies its normal equations") {
        const double gamma = 1e-3;
        const Matrix Z = testsup::random_matrix(r, ns, gen);
        const Matrix R = testsup::random_matrix(n, ns, gen);
        const Matrix W = kron_nr_columns(Z);
        const Matrix Vbar = fit_vbar(Z, R, gamma);
        const Matrix N = W * W.transpose() + gamma * Matrix::Identity(d, d);
        const Matrix rhs = R * W.transpose();
        CHECK((Vbar * N - rhs).norm() < 1e-8 * (1.0 + rhs.norm()));
    }

    SUBCASE("gamma = 0 with singular normal matrix advises regularization") {
        const Matrix Z = Matrix::Zero(r, ns);
        const Matrix R = testsup::random_matrix(n, ns, gen);
        CHECK_THROWS_WITH_AS(fit_vbar(Z, R, 0.0), doctest::Contains("gamma"), NumericalError);
    }

    SUBCASE("mismatched column counts and negative gamma are config errors") {
        CHECK_THROWS_AS(fit_vbar(Matrix::Zero(r, 4), Matrix::Zero(n, 5), 1.0), ConfigError);
        CHECK_THROWS_AS(fit_vbar(Matrix::Zero(r, 4), Matrix::Zero(n, 4), -1.0), ConfigError);
    }
}

TEST_CASE("fitted bases have the promised blocks and orthogonality") {
    auto fixture = testsup::make_wave_fixture();
    const Index r = 6;
    const double gq = 1e-8, gp = 1e-8;

    const ReductionBasis lsl = fit_bases(fixture.snaps, r, BasisKind::lsl, gq, gp);
    const ReductionBasis qmcl = fit_bases(fixture.snaps, r, BasisKind::qmcl, gq, gp);
    const ReductionBasis bq = fit_bases(fixture.snaps, r, BasisKind::bq, gq, gp);

    CHECK(lsl.kind == BasisKind::lsl);
    CHECK(lsl.r() == r);
    CHECK(lsl.Vbar_q.size() == 0);
    CHECK(lsl.Vbar_p.size() == 0);

    CHECK(qmcl.Vbar_q.rows() == fixture.snaps.half_dim());
    CHECK(qmcl.Vbar_q.cols() == kron_dim(r));
    CHECK(qmcl.Vbar_p.size() == 0);

    CHECK(bq.Vbar_p.rows() == fixture.snaps.half_dim());
    CHECK(bq.Vbar_p.cols() == kron_dim(r));

    // All three kinds share the linear part; qmcl and bq share the position
    // correction (identical deterministic computation).
    CHECK((qmcl.Phi - lsl.Phi).norm() == 0.0);
    CHECK((bq.Phi - lsl.Phi).norm() == 0.0);
    CHECK((bq.Vbar_q - qmcl.Vbar_q).norm() == 0.0);

    // Quadratic corrections live in the orthogonal complement of Phi.
    CHECK((qmcl.Phi.transpose() * qmcl.Vbar_q).norm() < 1e-10 * (1.0 + qmcl.Vbar_q.norm()));
    CHECK((bq.Phi.transpose() * bq.Vbar_p).norm() < 1e-10 * (1.0 + bq.Vbar_p.norm()));

    SUBCASE("reusing a precomputed decomposition is identical") {
        const TruncatedSvd svd = extended_svd(fixture.snaps, r + 2);
        const ReductionBasis again =
            fit_bases_from_svd(fixture.snaps, svd, r, BasisKind::qmcl, gq, gp);
        CHECK((again.Phi - qmcl.Phi).norm() == 0.0);
        CHECK((again.Vbar_q - qmcl.Vbar_q).norm() == 0.0);
        CHECK_THROWS_AS(
            fit_bases_from_svd(fixture.snaps, svd, r + 3, BasisKind::lsl, gq, gp), ConfigError);
        CHECK_THROWS_AS(fit_bases_from_svd(fixture.snaps, svd, 0, BasisKind::lsl, gq, gp),
                        ConfigError);
    }
}

TEST_CASE("basis save / load round trip") {
    auto fixture = testsup::make_wave_fixture(64, 2.5e-3, 80);
    const ReductionBasis basis = fit_bases(fixture.snaps, 4, BasisKind::bq, 0.015625, 0.25);

    TempDir dir("basis");
    basis.save(dir.str());
    const ReductionBasis back = ReductionBasis::load(dir.str());

    CHECK(back.kind == BasisKind::bq);
    CHECK(back.gamma_q == basis.gamma_q);
    CHECK(back.gamma_p == basis.gamma_p);
    CHECK((back.Phi - basis.Phi).norm() == 0.0);
    CHECK((back.Vbar_q - basis.Vbar_q).norm() == 0.0);
    CHECK((back.Vbar_p - basis.Vbar_p).norm() == 0.0);

    SUBCASE("a linear basis stores no correction files") {
        const ReductionBasis lin = fit_bases(fixture.snaps, 4, BasisKind::lsl, 0.0, 0.0);
        TempDir lin_dir("basis-lsl");
        lin.save(lin_dir.str());
        CHECK(!std::filesystem::exists(lin_dir.path() / "Vbar_q.mrx1"));
        const ReductionBasis lin_back = ReductionBasis::load(lin_dir.str());
        CHECK(lin_back.Vbar_q.size() == 0);
        CHECK((lin_back.Phi - lin.Phi).norm() == 0.0);
    }
}

TEST_CASE("basis-kind strings round trip and reject unknown names") {
    CHECK(to_string(BasisKind::lsl) == "lsl");
    CHECK(to_string(BasisKind::qmcl) == "qmcl");
    CHECK(to_string(BasisKind::bq) == "bq");
    for (BasisKind k : {BasisKind::lsl, BasisKind::qmcl, BasisKind::bq}) {
        CHECK(basis_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(basis_kind_from_string("pod"), ConfigError);
}

} // TEST_SUITE("basis")
