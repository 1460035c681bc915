#include "sympmor/rom.hpp"

#include "sympmor/kronecker.hpp"
#include "sympmor/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace sympmor {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(RomKind k) {
    switch (k) {
        case RomKind::lsl: return "lsl";
        case RomKind::smg_qmcl: return "smg-qmcl";
        case RomKind::galerkin_bq: return "galerkin-bq";
        case RomKind::naive_qm: return "naive-qm";
    }
    throw ConfigError("unknown rom kind");
}

RomKind rom_kind_from_string(const std::string& s) {
    if (s == "lsl") return RomKind::lsl;
    if (s == "smg-qmcl") return RomKind::smg_qmcl;
    if (s == "galerkin-bq") return RomKind::galerkin_bq;
    if (s == "naive-qm") return RomKind::naive_qm;
    throw ConfigError("unknown rom kind '" + s +
                      "' (use lsl | smg-qmcl | galerkin-bq | naive-qm)");
}

namespace {

void check_build(const HamiltonianFOM& fom, const Mapping& mapping, BasisKind expect,
                 const char* what) {
    if (mapping.kind() != expect) {
        throw ConfigError(std::string(what) + ": mapping kind is " +
                          to_string(mapping.kind()) + ", expected " + to_string(expect));
    }
    if (fom.half_dim() != mapping.n()) {
        throw ConfigError(std::string(what) + ": FOM dimension " +
                          std::to_string(fom.half_dim()) + " does not match basis rows " +
                          std::to_string(mapping.n()));
    }
}

/// Columns of Hq * Vbar etc. as dense products with the sparse operator.
Matrix sparse_times(const SparseMatrix& H, const Matrix& X) {
    return H * X;
}

} // namespace

ReducedModel build_lsl_rom(const HamiltonianFOM& fom, const Mapping& mapping) {
    check_build(fom, mapping, BasisKind::lsl, "lsl rom");
    ReducedModel rm;
    rm.kind_ = RomKind::lsl;
    rm.r_ = mapping.r();
    rm.mapping_ = mapping;

    if (fom.kind() == FomKind::linear_separable) {
        rm.offline_online_ = true;
        const Matrix& Phi = mapping.basis().Phi;
        const Matrix HqPhi = sparse_times(fom.Hq(), Phi);
        const Matrix HpPhi = sparse_times(fom.Hp(), Phi);
        rm.Aq_.noalias() = Phi.transpose() * HqPhi;
        rm.Ap_.noalias() = Phi.transpose() * HpPhi;
        rm.bq_.noalias() = HqPhi.transpose() * mapping.reference().q;
        rm.bp_.noalias() = HpPhi.transpose() * mapping.reference().p;
    } else {
        rm.fom_ = fom;
    }
    return rm;
}

ReducedModel build_bq_rom(const HamiltonianFOM& fom, const Mapping& mapping) {
    check_build(fom, mapping, BasisKind::bq, "bq rom");
    ReducedModel rm;
    rm.kind_ = RomKind::galerkin_bq;
    rm.r_ = mapping.r();
    rm.mapping_ = mapping;

    if (fom.kind() == FomKind::linear_separable) {
        rm.offline_online_ = true;
        const Matrix& Phi = mapping.basis().Phi;
        const Matrix HqPhi = sparse_times(fom.Hq(), Phi);
        const Matrix HpPhi = sparse_times(fom.Hp(), Phi);
        rm.Aq_.noalias() = Phi.transpose() * HqPhi;
        rm.Ap_.noalias() = Phi.transpose() * HpPhi;
        rm.bq_.noalias() = HqPhi.transpose() * mapping.reference().q;
        rm.bp_.noalias() = HpPhi.transpose() * mapping.reference().p;
        rm.Cq_.noalias() = Phi.transpose() * sparse_times(fom.Hq(), mapping.basis().Vbar_q);
        rm.Cp_.noalias() = Phi.transpose() * sparse_times(fom.Hp(), mapping.basis().Vbar_p);
    } else {
        rm.fom_ = fom;
    }
    return rm;
}

ReducedModel build_qmcl_rom(const HamiltonianFOM& fom, const Mapping& mapping) {
    check_build(fom, mapping, BasisKind::qmcl, "qmcl rom");
    ReducedModel rm;
    rm.kind_ = RomKind::smg_qmcl;
    rm.r_ = mapping.r();
    rm.mapping_ = mapping;

    if (fom.kind() == FomKind::linear_separable) {
        rm.offline_online_ = true;
        const Matrix& Phi = mapping.basis().Phi;
        const Matrix& Vq = mapping.basis().Vbar_q;
        const Matrix HqPhi = sparse_times(fom.Hq(), Phi);
        const Matrix HpPhi = sparse_times(fom.Hp(), Phi);
        const Matrix HqVq = sparse_times(fom.Hq(), Vq);
        const Matrix HpVq = sparse_times(fom.Hp(), Vq);
        rm.Aq_.noalias() = Phi.transpose() * HqPhi;
        rm.Ap_.noalias() = Phi.transpose() * HpPhi;
        rm.Cq_.noalias() = Phi.transpose() * HqVq;
        rm.Cp_.noalias() = Phi.transpose() * HpVq;
        rm.Gq_.noalias() = Vq.transpose() * HqVq;
        rm.Gp_.noalias() = Vq.transpose() * HpVq;
        rm.bq_.noalias() = HqPhi.transpose() * mapping.reference().q;
        rm.bp_.noalias() = HpPhi.transpose() * mapping.reference().p;
        rm.cq_.noalias() = HqVq.transpose() * mapping.reference().q;
        rm.cp_.noalias() = HpVq.transpose() * mapping.reference().p;
    } else {
        rm.fom_ = fom;
    }
    return rm;
}

ReducedModel build_naive_qm_rom(const HamiltonianFOM& fom, const JointQuadraticMap& map) {
    if (fom.kind() != FomKind::linear_separable) {
        throw ConfigError("naive-qm rom: only quadratic Hamiltonians are supported");
    }
    const Index two_n = 2 * fom.half_dim();
    if (map.V.rows() != two_n || map.y_ref.size() != two_n) {
        throw ConfigError("naive-qm rom: map dimensions do not match the FOM");
    }
    const Index two_r = map.V.cols();
    if (two_r % 2 != 0) throw ConfigError("naive-qm rom: reduced dimension must be even");
    if (map.Vbar.rows() != two_n || map.Vbar.cols() != kron_dim(two_r)) {
        throw ConfigError("naive-qm rom: quadratic block has wrong shape");
    }

    ReducedModel rm;
    rm.kind_ = RomKind::naive_qm;
    rm.r_ = two_r / 2;
    rm.joint_ = map;
    rm.offline_online_ = true;

    // The FOM field is linear, f(y) = L y with L = J blkdiag(Hq, Hp), so
    // applying rhs() column-wise assembles the exact projected operators.
    auto apply_L = [&fom](const Matrix& X) {
        Matrix LX(X.rows(), X.cols());
        for (Index c = 0; c < X.cols(); ++c) LX.col(c) = fom.rhs(X.col(c));
        return LX;
    };
    rm.nb_.noalias() = map.V.transpose() * fom.rhs(map.y_ref);
    rm.nA_.noalias() = map.V.transpose() * apply_L(map.V);
    rm.nC_.noalias() = map.V.transpose() * apply_L(map.Vbar);
    return rm;
}

SolverKind ReducedModel::default_solver() const {
    if (linear_rhs()) return SolverKind::fixed_linear;
    if (kind_ == RomKind::smg_qmcl) return SolverKind::newton_quasi;
    return SolverKind::newton_exact;
}

PartitionedState ReducedModel::decode_state(const Vector& z) const {
    if (kind_ == RomKind::naive_qm) {
        return PartitionedState::from_full(joint_.decode(z));
    }
    return decode(mapping_, z);
}

const Mapping& ReducedModel::mapping() const {
    if (kind_ == RomKind::naive_qm) {
        throw ConfigError("rom: the naive-qm model has no partitioned mapping");
    }
    return mapping_;
}

const JointQuadraticMap& ReducedModel::joint_map() const {
    if (kind_ != RomKind::naive_qm) {
        throw ConfigError("rom: only the naive-qm model has a joint map");
    }
    return joint_;
}

// ---------------------------------------------------------------------------
// Right-hand sides
// ---------------------------------------------------------------------------

Vector ReducedModel::rhs(const Vector& z) const {
    detail::require_size(z, dim(), "rom state");
    return offline_online_ ? rhs_offline(z) : rhs_lifted(z);
}

Vector ReducedModel::rhs_offline(const Vector& z) const {
    const Index r = r_;
    Vector out(2 * r);

    switch (kind_) {
        case RomKind::lsl: {
            // zdot = J (b + A z) with blockwise b, A.
            out.head(r) = bp_ + Ap_ * z.tail(r);
            out.tail(r) = -(bq_ + Aq_ * z.head(r));
            return out;
        }
        case RomKind::galerkin_bq: {
            out.head(r) = bp_ + Ap_ * z.tail(r) + Cp_ * kron_nr(Vector(z.tail(r)));
            out.tail(r) = -(bq_ + Aq_ * z.head(r) + Cq_ * kron_nr(Vector(z.head(r))));
            return out;
        }
        case RomKind::smg_qmcl: {
            const QmclPoint pt = qmcl_point(mapping_, z);
            const Vector kappa = kron_nr(pt.qt);
            const Vector bv = pt.B * pt.vt;

            // Gradient pieces in the coefficient coordinates
            // c_V = (qt, vt), c_Vbar = (kappa, B vt).
            const Vector F_V_q = bq_ + Aq_ * pt.qt + Cq_ * kappa;
            const Vector F_V_p = bp_ + Ap_ * pt.vt + Cp_ * bv;
            const Vector F_W_q = cq_ + Cq_.transpose() * pt.qt + Gq_ * kappa;
            const Vector F_W_p = cp_ + Cp_.transpose() * pt.vt + Gp_ * bv;

            Vector grad_q = F_V_q + pt.Dv.transpose() * F_V_p + pt.B.transpose() * F_W_q +
                            pt.K.transpose() * F_W_p;
            Vector grad_p = pt.M_llt.solve(F_V_p + pt.B.transpose() * F_W_p);

            out.head(r) = grad_p;
            out.tail(r) = -grad_q;
            return out;
        }
        case RomKind::naive_qm:
            return nb_ + nA_ * z + nC_ * kron_nr(z);
    }
    throw ConfigError("rom: unknown kind");
}

Vector ReducedModel::rhs_lifted(const Vector& z) const {
    const Vector y = decode_state(z).to_full();
    const Vector f = fom_->rhs(y);
    const Index n = fom_->half_dim();
    const Index r = r_;

    switch (kind_) {
        case RomKind::lsl:
        case RomKind::galerkin_bq: {
            // Plain Galerkin projection with V = blkdiag(Phi, Phi); for bq
            // the blkdiag basis is a left inverse of the decoder Jacobian.
            const Matrix& Phi = mapping_.basis().Phi;
            Vector out(2 * r);
            out.head(r).noalias() = Phi.transpose() * f.head(n);
            out.tail(r).noalias() = Phi.transpose() * f.tail(n);
            return out;
        }
        case RomKind::smg_qmcl:
            return symplectic_inverse_apply(mapping_, z, f);
        case RomKind::naive_qm:
            break;
    }
    throw ConfigError("rom: unsupported lifted evaluation");
}

// ---------------------------------------------------------------------------
// Jacobians
// ---------------------------------------------------------------------------

Matrix ReducedModel::rhs_jacobian(const Vector& z) const {
    detail::require_size(z, dim(), "rom state");
    return offline_online_ ? jacobian_offline(z) : jacobian_lifted(z);
}

Matrix ReducedModel::jacobian_offline(const Vector& z) const {
    const Index r = r_;

    switch (kind_) {
        case RomKind::lsl: {
            Matrix J = Matrix::Zero(2 * r, 2 * r);
            J.topRightCorner(r, r) = Ap_;
            J.bottomLeftCorner(r, r) = -Aq_;
            return J;
        }
        case RomKind::galerkin_bq: {
            Matrix J = Matrix::Zero(2 * r, 2 * r);
            J.topRightCorner(r, r) = Ap_ + times_kron_jacobian(Cp_, Vector(z.tail(r)));
            J.bottomLeftCorner(r, r) = -(Aq_ + times_kron_jacobian(Cq_, Vector(z.head(r))));
            return J;
        }
        case RomKind::smg_qmcl: {
            // Gauss-Newton approximation J_{2r} Dc^T H~ Dc in the coefficient
            // coordinates, with Dc_V = [[I, 0], [Dv, M^{-1}]] and
            // Dc_Vbar = [[B, 0], [K, B M^{-1}]].
            const QmclPoint pt = qmcl_point(mapping_, z);
            const Matrix CqB = times_kron_jacobian(Cq_, pt.qt);
            const Matrix GqB = times_kron_jacobian(Gq_, pt.qt);
            const Matrix GpB = times_kron_jacobian(Gp_, pt.qt);
            const Matrix CpB = times_kron_jacobian(Cp_, pt.qt);

            auto solve_right = [&pt](const Matrix& X) { // X M^{-1}
                return Matrix(pt.M_llt.solve(X.transpose()).transpose());
            };

            const Matrix T1qq = Aq_ + CqB;
            const Matrix T1pq = Ap_ * pt.Dv + Cp_ * pt.K;
            const Matrix T1pp = solve_right(Ap_ + CpB);
            const Matrix T2qq = Cq_.transpose() + GqB;
            const Matrix T2pq = Cp_.transpose() * pt.Dv + Gp_ * pt.K;
            const Matrix T2pp = solve_right(Cp_.transpose() + GpB);

            const Matrix inner_qq = T1qq + pt.Dv.transpose() * T1pq +
                                    pt.B.transpose() * T2qq + pt.K.transpose() * T2pq;
            const Matrix inner_qp =
                pt.Dv.transpose() * T1pp + pt.K.transpose() * T2pp;
            const Matrix inner_pq = pt.M_llt.solve(Matrix(T1pq + pt.B.transpose() * T2pq));
            const Matrix inner_pp = pt.M_llt.solve(Matrix(T1pp + pt.B.transpose() * T2pp));

            Matrix J(2 * r, 2 * r);
            J.topLeftCorner(r, r) = inner_pq;
            J.topRightCorner(r, r) = inner_pp;
            J.bottomLeftCorner(r, r) = -inner_qq;
            J.bottomRightCorner(r, r) = -inner_qp;
            return J;
        }
        case RomKind::naive_qm:
            return nA_ + times_kron_jacobian(nC_, z);
    }
    throw ConfigError("rom: unknown kind");
}

Matrix ReducedModel::jacobian_lifted(const Vector& z) const {
    const Vector y = decode_state(z).to_full();
    const Index n = fom_->half_dim();
    const Index r = r_;

    switch (kind_) {
        case RomKind::lsl:
        case RomKind::galerkin_bq: {
            // d/dz [V^T f(Gamma(z))] = V^T J_f(Gamma) DGamma(z); the field
            // Jacobian is J_f = [[0, Hp], [-W, 0]] with W = hessian q-block.
            const Matrix& Phi = mapping_.basis().Phi;
            const auto& basis = mapping_.basis();
            Matrix Dq = Phi;
            Matrix Dp = Phi;
            if (kind_ == RomKind::galerkin_bq) {
                Dq += times_kron_jacobian(basis.Vbar_q, Vector(z.head(r)));
                Dp += times_kron_jacobian(basis.Vbar_p, Vector(z.tail(r)));
            }
            SparseMatrix Wq = fom_->Hq();
            if (fom_->kind() == FomKind::nonlinear_cubic) {
                SparseMatrix D(n, n);
                std::vector<Eigen::Triplet<double>> trips;
                trips.reserve(static_cast<std::size_t>(n));
                for (Index i = 0; i < n; ++i) {
                    trips.emplace_back(i, i, 3.0 * fom_->cubic_coefficient() * y(i) * y(i));
                }
                D.setFromTriplets(trips.begin(), trips.end());
                Wq = Wq + D;
            }
            Matrix J = Matrix::Zero(2 * r, 2 * r);
            J.topRightCorner(r, r).noalias() = Phi.transpose() * (fom_->Hp() * Dp);
            J.bottomLeftCorner(r, r).noalias() = -(Phi.transpose() * (Wq * Dq));
            return J;
        }
        case RomKind::smg_qmcl: {
            // Gauss-Newton: J_{2r} DGamma^T hess(H) DGamma.
            const Matrix DG = jacobian(mapping_, z);
            const SparseMatrix H = fom_->hessian_dyn(y);
            const Matrix inner = DG.transpose() * (H * DG);
            Matrix J(2 * r, 2 * r);
            J.topRows(r) = inner.bottomRows(r);
            J.bottomRows(r) = -inner.topRows(r);
            return J;
        }
        case RomKind::naive_qm:
            break;
    }
    throw ConfigError("rom: unsupported lifted evaluation");
}

// ---------------------------------------------------------------------------
// Integration adapters
// ---------------------------------------------------------------------------

DenseMidpointSystem make_rom_system(const ReducedModel& rm) {
    return DenseMidpointSystem(
        rm.dim(), [&rm](const Vector& z) { return rm.rhs(z); },
        [&rm](const Vector& z) { return rm.rhs_jacobian(z); }, rm.linear_rhs());
}

Matrix decode_trajectory(const ReducedModel& rm, const Matrix& Z) {
    if (rm.kind() == RomKind::naive_qm) return rm.joint_map().decode_columns(Z);
    return decode_columns(rm.mapping(), Z);
}

Trajectory integrate_rom(const ReducedModel& rm, const Vector& z0, double dt, Index num_steps,
                         double t0) {
    DenseMidpointSystem sys = make_rom_system(rm);
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.num_steps = num_steps;
    cfg.solver = rm.default_solver();
    return integrate(sys, z0, cfg, t0);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

/// Sparse matrices travel as 3 x nnz triplet tables.
Matrix sparse_to_triplets(const SparseMatrix& A) {
    Matrix T(3, A.nonZeros());
    Index c = 0;
    for (Index k = 0; k < A.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
            T(0, c) = static_cast<double>(it.row());
            T(1, c) = static_cast<double>(it.col());
            T(2, c) = it.value();
            ++c;
        }
    }
    return T;
}

SparseMatrix triplets_to_sparse(const Matrix& T, Index rows, Index cols) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(T.cols()));
    for (Index c = 0; c < T.cols(); ++c) {
        trips.emplace_back(static_cast<Index>(T(0, c)), static_cast<Index>(T(1, c)), T(2, c));
    }
    SparseMatrix A(rows, cols);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

void save_if(const std::string& dir, const char* name, const Matrix& m, json& files) {
    if (m.size() == 0) return;
    save_matrix(dir + "/" + name + ".mrx1", m);
    files.push_back(name);
}

void save_if(const std::string& dir, const char* name, const Vector& v, json& files) {
    if (v.size() == 0) return;
    save_vector(dir + "/" + name + ".mrx1", v);
    files.push_back(name);
}

} // namespace

void ReducedModel::save(const std::string& dir) const {
    fs::create_directories(dir);
    json meta;
    meta["kind"] = to_string(kind_);
    meta["r"] = r_;
    meta["offline_online"] = offline_online_;
    json files = json::array();

    if (kind_ == RomKind::naive_qm) {
        save_matrix(dir + "/V.mrx1", joint_.V);
        save_matrix(dir + "/Vbar.mrx1", joint_.Vbar);
        save_vector(dir + "/y_ref.mrx1", joint_.y_ref);
    } else {
        mapping_.basis().save(dir + "/basis");
        save_vector(dir + "/y_ref.mrx1", mapping_.reference().to_full());
    }

    save_if(dir, "Aq", Aq_, files);
    save_if(dir, "Ap", Ap_, files);
    save_if(dir, "Cq", Cq_, files);
    save_if(dir, "Cp", Cp_, files);
    save_if(dir, "Gq", Gq_, files);
    save_if(dir, "Gp", Gp_, files);
    save_if(dir, "bq", bq_, files);
    save_if(dir, "bp", bp_, files);
    save_if(dir, "cq", cq_, files);
    save_if(dir, "cp", cp_, files);
    save_if(dir, "nb", nb_, files);
    save_if(dir, "nA", nA_, files);
    save_if(dir, "nC", nC_, files);
    meta["files"] = files;

    meta["has_fom"] = fom_.has_value();
    if (fom_) {
        json fj;
        fj["n"] = fom_->half_dim();
        fj["kind"] =
            fom_->kind() == FomKind::linear_separable ? "linear-separable" : "nonlinear-cubic";
        fj["cubic_coefficient"] = fom_->cubic_coefficient();
        fj["quadrature_weight"] = fom_->quadrature_weight();
        save_matrix(dir + "/Hq_triplets.mrx1", sparse_to_triplets(fom_->Hq()));
        save_matrix(dir + "/Hp_triplets.mrx1", sparse_to_triplets(fom_->Hp()));
        meta["fom"] = fj;
    }

    std::ofstream out(dir + "/manifest.json");
    if (!out) throw ConfigError("rom: cannot write " + dir + "/manifest.json");
    out << meta.dump(2) << "\n";
}

ReducedModel ReducedModel::load(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw ConfigError("rom: cannot read " + dir + "/manifest.json");
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ConfigError("rom: malformed manifest.json: " + std::string(e.what()));
    }

    ReducedModel rm;
    rm.kind_ = rom_kind_from_string(meta.at("kind").get<std::string>());
    rm.r_ = meta.at("r").get<Index>();
    rm.offline_online_ = meta.at("offline_online").get<bool>();

    if (rm.kind_ == RomKind::naive_qm) {
        rm.joint_.V = load_matrix(dir + "/V.mrx1");
        rm.joint_.Vbar = load_matrix(dir + "/Vbar.mrx1");
        rm.joint_.y_ref = load_vector(dir + "/y_ref.mrx1");
    } else {
        ReductionBasis basis = ReductionBasis::load(dir + "/basis");
        Vector y_ref = load_vector(dir + "/y_ref.mrx1");
        rm.mapping_ = Mapping(std::move(basis), PartitionedState::from_full(y_ref));
    }

    auto load_if = [&dir](const char* name, auto& target) {
        const std::string path = dir + "/" + std::string(name) + ".mrx1";
        if (!fs::exists(path)) return;
        if constexpr (std::is_same_v<std::decay_t<decltype(target)>, Vector>) {
            target = load_vector(path);
        } else {
            target = load_matrix(path);
        }
    };
    load_if("Aq", rm.Aq_);
    load_if("Ap", rm.Ap_);
    load_if("Cq", rm.Cq_);
    load_if("Cp", rm.Cp_);
    load_if("Gq", rm.Gq_);
    load_if("Gp", rm.Gp_);
    load_if("bq", rm.bq_);
    load_if("bp", rm.bp_);
    load_if("cq", rm.cq_);
    load_if("cp", rm.cp_);
    load_if("nb", rm.nb_);
    load_if("nA", rm.nA_);
    load_if("nC", rm.nC_);

    if (meta.at("has_fom").get<bool>()) {
        const auto& fj = meta.at("fom");
        const Index n = fj.at("n").get<Index>();
        SparseMatrix Hq = triplets_to_sparse(load_matrix(dir + "/Hq_triplets.mrx1"), n, n);
        SparseMatrix Hp = triplets_to_sparse(load_matrix(dir + "/Hp_triplets.mrx1"), n, n);
        if (fj.at("kind").get<std::string>() == "linear-separable") {
            rm.fom_ = HamiltonianFOM(std::move(Hq), std::move(Hp),
                                     fj.at("quadrature_weight").get<double>());
        } else {
            rm.fom_ = HamiltonianFOM(std::move(Hq), std::move(Hp),
                                     fj.at("cubic_coefficient").get<double>(),
                                     fj.at("quadrature_weight").get<double>());
        }
    }
    return rm;
}

} // namespace sympmor
