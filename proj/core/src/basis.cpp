#include "sympmor/basis.hpp"

#include "sympmor/kronecker.hpp"
#include "sympmor/matrix_io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

namespace sympmor {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(BasisKind k) {
    switch (k) {
        case BasisKind::lsl: return "lsl";
        case BasisKind::qmcl: return "qmcl";
        case BasisKind::bq: return "bq";
    }
    throw ConfigError("unknown basis kind");
}

BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "lsl") return BasisKind::lsl;
    if (s == "qmcl") return BasisKind::qmcl;
    if (s == "bq") return BasisKind::bq;
    throw ConfigError("unknown basis kind '" + s + "' (use lsl | qmcl | bq)");
}

namespace {

constexpr double kRankFloor = 1e-12; ///< relative singular-value cutoff

/// Flip each column so its entry of largest magnitude is positive; makes the
/// singular vectors (and everything downstream) deterministic.
void fix_signs(Matrix& U) {
    for (Index c = 0; c < U.cols(); ++c) {
        Index idx = 0;
        U.col(c).cwiseAbs().maxCoeff(&idx);
        if (U(idx, c) < 0.0) U.col(c) = -U.col(c);
    }
}

/// Shared tail of the method of snapshots: eigenvalues of a Gram matrix
/// (ascending from Eigen) become descending singular values; columns of U
/// are filled by the caller.  The Gram route only resolves singular values
/// down to sqrt(eps) * sigma_1 (squaring loses the bottom half of the
/// exponent range), so callers must refine sigma directly from the data
/// before applying the rank floor.
struct GramSpectrum {
    Matrix eigvecs; ///< columns ordered by descending eigenvalue
    Vector sigma;   ///< Gram estimates; noise floor ~ sqrt(eps) * sigma_1
};

GramSpectrum gram_spectrum(const Matrix& G, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
    if (eig.info() != Eigen::Success) {
        throw NumericalError(what + ": eigendecomposition failed");
    }
    const Index m = G.rows();
    GramSpectrum out;
    out.eigvecs.resize(m, m);
    out.sigma.resize(m);
    for (Index i = 0; i < m; ++i) {
        const Index src = m - 1 - i; // ascending -> descending
        out.sigma(i) = std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
        out.eigvecs.col(i) = eig.eigenvectors().col(src);
    }
    if (out.sigma(0) <= 0.0) throw NumericalError(what + ": data matrix is zero");
    return out;
}

void check_rank(Index want, Index rank, const std::string& what) {
    if (want > rank) {
        throw NumericalError(what + ": requested " + std::to_string(want) +
                             " modes but the numerical rank is " + std::to_string(rank) +
                             " (singular values below " + std::to_string(kRankFloor) +
                             " * sigma_1 are discarded)");
    }
}

/// Number of leading singular values above the relative rank floor.
Index rank_from_sigma(const Vector& sigma, const std::string& what) {
    if (sigma.size() == 0 || sigma(0) <= 0.0) throw NumericalError(what + ": data matrix is zero");
    const double floor = kRankFloor * sigma(0);
    Index rank = 0;
    while (rank < sigma.size() && sigma(rank) >= floor) ++rank;
    return rank;
}

/// Above this many flops for the dense Gram + eigendecomposition route, the
/// method of snapshots switches to blocked subspace iteration.
double g_dense_gram_flop_limit = 1e11;

Matrix deterministic_start_block(Index rows, Index cols) {
    std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
    Matrix G(rows, cols);
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53; // [0, 1)
            G(r, c) = 2.0 * u - 1.0;
        }
    }
    return G;
}

Matrix orthonormal_columns(const Matrix& M) {
    Eigen::HouseholderQR<Matrix> qr(M);
    return qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
}

struct LeadingSvd {
    Matrix U;     ///< Ritz vectors of A A^T, descending
    Vector sigma; ///< leading computed singular values
};

/// Leading k singular triplets of an implicitly given rows x cols matrix via
/// blocked subspace iteration with Rayleigh-Ritz extraction.  `apply` is
/// X -> A X and `apply_t` is X -> A^T X.  The start block has a fixed seed,
/// so the result is deterministic; iteration stops once the leading Ritz
/// values stagnate to relative 1e-11.
LeadingSvd subspace_svd(Index rows, Index cols, const std::function<Matrix(const Matrix&)>& apply,
                        const std::function<Matrix(const Matrix&)>& apply_t, Index k,
                        const std::string& what) {
    const Index small = std::min(rows, cols);
    const Index l = std::min(small, k + std::max<Index>(10, k));
    constexpr int kMaxSweeps = 60;
    constexpr double kRitzTol = 1e-11;

    Matrix Q = orthonormal_columns(apply(deterministic_start_block(cols, l)));
    Vector sigma = Vector::Zero(l);
    Vector prev = Vector::Constant(l, std::numeric_limits<double>::infinity());
    Matrix V(l, l);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const Matrix B = apply_t(Q); // cols x l
        const Matrix S = B.transpose() * B; // = Q^T (A A^T) Q
        Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
        if (eig.info() != Eigen::Success)
            throw NumericalError(what + ": subspace iteration eigensolve failed");
        for (Index i = 0; i < l; ++i) {
            V.col(i) = eig.eigenvectors().col(l - 1 - i);
        }
        // sigma_i = |A^T u_i| taken from B directly resolves values down to
        // eps * sigma_1; sqrt of the Ritz values would bottom out at
        // sqrt(eps) * sigma_1.
        sigma = (B * V).colwise().norm().transpose();
        const double scale = std::max(sigma(0), std::numeric_limits<double>::min());
        const double delta = (sigma.head(k) - prev.head(k)).cwiseAbs().maxCoeff();
        if (sweep >= 2 && delta <= kRitzTol * scale) break;
        prev = sigma;
        // Keep Q consistent with (sigma, V) when the sweep budget runs out.
        if (sweep + 1 < kMaxSweeps) Q = orthonormal_columns(apply(B));
    }
    LeadingSvd out;
    out.U = Q * V;
    out.sigma = sigma;
    return out;
}

} // namespace

TruncatedSvd extended_svd(const SnapshotSet& snapshots, Index max_r) {
    const Index n = snapshots.half_dim();
    const Index ns = snapshots.num_cols();
    const Index m = 2 * ns;
    const double g = snapshots.momentum_scale();
    const std::string what = "extended snapshot svd";

    if (max_r < 1 || max_r > std::min(n, m)) {
        throw ConfigError(what + ": requested " + std::to_string(max_r) +
                          " modes, valid range is 1.." + std::to_string(std::min(n, m)));
    }

    const Matrix& Q = snapshots.Q();
    const Matrix& P = snapshots.P();

    const Index small = std::min(n, m);
    const double dense_flops =
        static_cast<double>(small) * static_cast<double>(small) * static_cast<double>(std::max(n, m));

    TruncatedSvd out;
    if (dense_flops > g_dense_gram_flop_limit) {
        // Too large for a dense Gram matrix; iterate on Y = (Q, g P) without
        // ever materializing it.
        auto apply = [&](const Matrix& X) {
            Matrix R = Q * X.topRows(ns);
            R.noalias() += g * (P * X.bottomRows(ns));
            return R;
        };
        auto apply_t = [&](const Matrix& X) {
            Matrix R(m, X.cols());
            R.topRows(ns).noalias() = Q.transpose() * X;
            R.bottomRows(ns).noalias() = g * (P.transpose() * X);
            return R;
        };
        LeadingSvd ls = subspace_svd(n, m, apply, apply_t, max_r, what);
        const Index rank = rank_from_sigma(ls.sigma, what);
        check_rank(max_r, rank, what);
        out.sigma = ls.sigma;
        out.numerical_rank = rank;
        out.U = ls.U.leftCols(max_r);
    } else if (m <= n) {
        // Small Gram Y^T Y with Y = (Q, g P), assembled blockwise.
        Matrix G(m, m);
        G.topLeftCorner(ns, ns).noalias() = Q.transpose() * Q;
        G.topRightCorner(ns, ns).noalias() = g * (Q.transpose() * P);
        G.bottomLeftCorner(ns, ns) = G.topRightCorner(ns, ns).transpose();
        G.bottomRightCorner(ns, ns).noalias() = (g * g) * (P.transpose() * P);
        GramSpectrum sp = gram_spectrum(G, what);
        // Push every eigenvector through the data: |Y v_i| gives sigma_i to
        // eps * sigma_1, and the leading images, re-orthonormalized, give U.
        Matrix B(n, max_r);
        Vector refined(m);
        for (Index i = 0; i < m; ++i) {
            const Vector w =
                Q * sp.eigvecs.col(i).head(ns) + g * (P * sp.eigvecs.col(i).tail(ns));
            refined(i) = w.norm();
            if (i < max_r) B.col(i) = w;
        }
        const Index rank = rank_from_sigma(refined, what);
        check_rank(max_r, rank, what);
        out.sigma = refined;
        out.numerical_rank = rank;
        out.U = orthonormal_columns(B);
    } else {
        // Large-side Gram Y Y^T = Q Q^T + g^2 P P^T; the extended matrix is
        // never materialized.  Eigenvectors are the left singular vectors,
        // orthonormal to machine precision; only sigma needs refinement.
        Matrix G = Matrix::Zero(n, n);
        G.selfadjointView<Eigen::Lower>().rankUpdate(Q, 1.0);
        G.selfadjointView<Eigen::Lower>().rankUpdate(P, g * g);
        G.triangularView<Eigen::StrictlyUpper>() =
            G.triangularView<Eigen::StrictlyLower>().transpose();
        GramSpectrum sp = gram_spectrum(G, what);
        const Vector refined = ((Q.transpose() * sp.eigvecs).colwise().squaredNorm() +
                                (g * g) * (P.transpose() * sp.eigvecs).colwise().squaredNorm())
                                   .cwiseSqrt()
                                   .transpose();
        const Index rank = rank_from_sigma(refined, what);
        check_rank(max_r, rank, what);
        out.sigma = refined;
        out.numerical_rank = rank;
        out.U = sp.eigvecs.leftCols(max_r);
    }
    fix_signs(out.U);
    return out;
}

Matrix cotangent_lift(const SnapshotSet& snapshots, Index r) {
    return extended_svd(snapshots, r).U;
}

TruncatedSvd pod_svd(const Matrix& Y, Index max_k) {
    const Index rows = Y.rows();
    const Index cols = Y.cols();
    const std::string what = "pod svd";
    if (max_k < 1 || max_k > std::min(rows, cols)) {
        throw ConfigError(what + ": requested " + std::to_string(max_k) +
                          " modes, valid range is 1.." + std::to_string(std::min(rows, cols)));
    }

    const Index small = std::min(rows, cols);
    const double dense_flops =
        static_cast<double>(small) * static_cast<double>(small) *
        static_cast<double>(std::max(rows, cols));

    TruncatedSvd out;
    if (dense_flops > g_dense_gram_flop_limit) {
        auto apply = [&](const Matrix& X) { return Matrix(Y * X); };
        auto apply_t = [&](const Matrix& X) { return Matrix(Y.transpose() * X); };
        LeadingSvd ls = subspace_svd(rows, cols, apply, apply_t, max_k, what);
        const Index rank = rank_from_sigma(ls.sigma, what);
        check_rank(max_k, rank, what);
        out.sigma = ls.sigma;
        out.numerical_rank = rank;
        out.U = ls.U.leftCols(max_k);
    } else if (cols <= rows) {
        Matrix G = Matrix::Zero(cols, cols);
        G.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose(), 1.0);
        G.triangularView<Eigen::StrictlyUpper>() =
            G.triangularView<Eigen::StrictlyLower>().transpose();
        GramSpectrum sp = gram_spectrum(G, what);
        const Matrix images = Y * sp.eigvecs; // column i is sigma_i u_i + noise
        const Vector refined = images.colwise().norm().transpose();
        const Index rank = rank_from_sigma(refined, what);
        check_rank(max_k, rank, what);
        out.sigma = refined;
        out.numerical_rank = rank;
        out.U = orthonormal_columns(images.leftCols(max_k));
    } else {
        Matrix G = Matrix::Zero(rows, rows);
        G.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0);
        G.triangularView<Eigen::StrictlyUpper>() =
            G.triangularView<Eigen::StrictlyLower>().transpose();
        GramSpectrum sp = gram_spectrum(G, what);
        const Vector refined =
            (Y.transpose() * sp.eigvecs).colwise().norm().transpose();
        const Index rank = rank_from_sigma(refined, what);
        check_rank(max_k, rank, what);
        out.sigma = refined;
        out.numerical_rank = rank;
        out.U = sp.eigvecs.leftCols(max_k);
    }
    fix_signs(out.U);
    return out;
}

Matrix fit_vbar(const Matrix& Z, const Matrix& R, double gamma) {
    if (Z.cols() != R.cols()) {
        throw ConfigError("vbar fit: coordinate and residual column counts differ (" +
                          std::to_string(Z.cols()) + " vs " + std::to_string(R.cols()) + ")");
    }
    if (gamma < 0.0) throw ConfigError("vbar fit: gamma must be nonnegative");

    const Matrix W = kron_nr_columns(Z);
    const Index d = W.rows();

    Matrix N = Matrix::Zero(d, d);
    N.selfadjointView<Eigen::Lower>().rankUpdate(W, 1.0);
    N.triangularView<Eigen::StrictlyUpper>() =
        N.triangularView<Eigen::StrictlyLower>().transpose();
    N.diagonal().array() += gamma;

    Eigen::LLT<Matrix> llt(N);
    if (llt.info() != Eigen::Success) {
        if (gamma == 0.0) {
            throw NumericalError("vbar fit: normal matrix W W^T is singular for gamma = 0; "
                                 "use a positive regularization gamma");
        }
        throw NumericalError("vbar fit: normal matrix factorization failed");
    }
    // Vbar = R W^T (W W^T + gamma I)^{-1}, solved through the SPD factor.
    Matrix WRt = W * R.transpose();
    return llt.solve(WRt).transpose();
}

ReductionBasis fit_bases_from_svd(const SnapshotSet& snapshots, const TruncatedSvd& svd,
                                  Index r, BasisKind kind, double gamma_q, double gamma_p) {
    if (r < 1 || r > svd.U.cols()) {
        throw ConfigError("basis fit: requested r = " + std::to_string(r) +
                          " from a decomposition holding " + std::to_string(svd.U.cols()) +
                          " modes");
    }
    ReductionBasis basis;
    basis.kind = kind;
    basis.Phi = svd.U.leftCols(r);
    basis.gamma_q = gamma_q;
    basis.gamma_p = gamma_p;

    // The exact minimizer lies in the orthogonal complement of Phi because the
    // residual does, but solving the regularized normal equations loses that
    // property at roundoff amplified by the condition number; one explicit
    // projection restores it to machine precision.
    const auto into_complement = [&](Matrix& Vbar) {
        Vbar.noalias() -= basis.Phi * (basis.Phi.transpose() * Vbar);
    };
    if (kind == BasisKind::qmcl || kind == BasisKind::bq) {
        const Matrix& Qc = snapshots.Q();
        Matrix Zq = basis.Phi.transpose() * Qc;
        Matrix Rq = Qc - basis.Phi * Zq;
        basis.Vbar_q = fit_vbar(Zq, Rq, gamma_q);
        into_complement(basis.Vbar_q);
    }
    if (kind == BasisKind::bq) {
        const Matrix& Pc = snapshots.P();
        Matrix Zp = basis.Phi.transpose() * Pc;
        Matrix Rp = Pc - basis.Phi * Zp;
        basis.Vbar_p = fit_vbar(Zp, Rp, gamma_p);
        into_complement(basis.Vbar_p);
    }
    return basis;
}

ReductionBasis fit_bases(const SnapshotSet& snapshots, Index r, BasisKind kind, double gamma_q,
                         double gamma_p) {
    return fit_bases_from_svd(snapshots, extended_svd(snapshots, r), r, kind, gamma_q, gamma_p);
}

void ReductionBasis::save(const std::string& dir) const {
    fs::create_directories(dir);
    save_matrix(dir + "/Phi.mrx1", Phi);
    if (Vbar_q.size() > 0) save_matrix(dir + "/Vbar_q.mrx1", Vbar_q);
    if (Vbar_p.size() > 0) save_matrix(dir + "/Vbar_p.mrx1", Vbar_p);

    json meta;
    meta["kind"] = to_string(kind);
    meta["r"] = r();
    meta["gamma_q"] = gamma_q;
    meta["gamma_p"] = gamma_p;
    std::ofstream out(dir + "/meta.json");
    if (!out) throw ConfigError("basis: cannot write " + dir + "/meta.json");
    out << meta.dump(2) << "\n";
}

ReductionBasis ReductionBasis::load(const std::string& dir) {
    std::ifstream in(dir + "/meta.json");
    if (!in) throw ConfigError("basis: cannot read " + dir + "/meta.json");
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ConfigError("basis: malformed meta.json: " + std::string(e.what()));
    }

    ReductionBasis basis;
    basis.kind = basis_kind_from_string(meta.at("kind").get<std::string>());
    basis.gamma_q = meta.at("gamma_q").get<double>();
    basis.gamma_p = meta.at("gamma_p").get<double>();
    basis.Phi = load_matrix(dir + "/Phi.mrx1");
    if (fs::exists(dir + "/Vbar_q.mrx1")) basis.Vbar_q = load_matrix(dir + "/Vbar_q.mrx1");
    if (fs::exists(dir + "/Vbar_p.mrx1")) basis.Vbar_p = load_matrix(dir + "/Vbar_p.mrx1");

    const Index r_meta = meta.at("r").get<Index>();
    if (r_meta != basis.r()) {
        throw ConfigError("basis: meta.json reports r = " + std::to_string(r_meta) +
                          " but Phi has " + std::to_string(basis.r()) + " columns");
    }
    return basis;
}

namespace detail {

double set_dense_gram_flop_limit(double limit) {
    const double previous = g_dense_gram_flop_limit;
    g_dense_gram_flop_limit = limit;
    return previous;
}

} // namespace detail

} // namespace sympmor
