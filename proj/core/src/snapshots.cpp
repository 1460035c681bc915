#include "sympmor/snapshots.hpp"

#include "sympmor/integrator.hpp"
#include "sympmor/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace sympmor {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ReferenceKind k) {
    return k == ReferenceKind::zero ? "zero" : "initial-condition";
}

ReferenceKind reference_kind_from_string(const std::string& s) {
    if (s == "zero") return ReferenceKind::zero;
    if (s == "initial-condition") return ReferenceKind::initial_condition;
    throw ConfigError("unknown reference kind '" + s + "' (use zero | initial-condition)");
}

SnapshotSet::SnapshotSet(Matrix Q_raw, Matrix P_raw, PartitionedState reference,
                         ReferenceKind reference_kind, std::vector<ParameterBlock> params,
                         double momentum_scale)
    : Q_raw_(std::move(Q_raw)), P_raw_(std::move(P_raw)), ref_(std::move(reference)),
      ref_kind_(reference_kind), params_(std::move(params)), momentum_scale_(momentum_scale) {
    if (Q_raw_.rows() != P_raw_.rows() || Q_raw_.cols() != P_raw_.cols()) {
        throw ConfigError("snapshots: position and momentum matrices must have equal shape");
    }
    if (ref_.half_dim() != Q_raw_.rows()) {
        throw ConfigError("snapshots: reference state dimension " +
                          std::to_string(ref_.half_dim()) + " does not match snapshot rows " +
                          std::to_string(Q_raw_.rows()));
    }
    if (momentum_scale_ <= 0.0) throw ConfigError("snapshots: momentum scale must be positive");
    Index total = 0;
    for (auto& blk : params_) {
        if (blk.col_offset != total) {
            throw ConfigError("snapshots: parameter blocks are not contiguous");
        }
        total += blk.num_cols;
    }
    if (total != Q_raw_.cols()) {
        throw ConfigError("snapshots: parameter blocks cover " + std::to_string(total) +
                          " columns, matrices have " + std::to_string(Q_raw_.cols()));
    }
    reference_is_zero_ = ref_.q.isZero(0.0) && ref_.p.isZero(0.0);
}

const Matrix& SnapshotSet::Q() const {
    if (reference_is_zero_) return Q_raw_;
    if (!centered_built_) {
        Q_c_ = Q_raw_.colwise() - ref_.q;
        P_c_ = P_raw_.colwise() - ref_.p;
        centered_built_ = true;
    }
    return Q_c_;
}

const Matrix& SnapshotSet::P() const {
    if (reference_is_zero_) return P_raw_;
    if (!centered_built_) {
        Q(); // builds both blocks
    }
    return P_c_;
}

Matrix SnapshotSet::extended_matrix() const {
    Matrix Y(half_dim(), 2 * num_cols());
    Y.leftCols(num_cols()) = Q();
    Y.rightCols(num_cols()) = momentum_scale_ * P();
    return Y;
}

void SnapshotSet::save(const std::string& dir) const {
    fs::create_directories(dir);
    save_matrix(dir + "/Q.mrx1", Q_raw_);
    save_matrix(dir + "/P.mrx1", P_raw_);
    save_vector(dir + "/y_ref.mrx1", ref_.to_full());

    json meta;
    meta["half_dim"] = half_dim();
    meta["reference_kind"] = to_string(ref_kind_);
    meta["momentum_scale"] = momentum_scale_;
    meta["parameters"] = json::array();
    for (const auto& blk : params_) {
        json b;
        b["mu"] = std::vector<double>(blk.mu.data(), blk.mu.data() + blk.mu.size());
        b["t0"] = blk.t0;
        b["dt"] = blk.dt;
        b["num_cols"] = blk.num_cols;
        meta["parameters"].push_back(b);
    }
    std::ofstream out(dir + "/meta.json");
    if (!out) throw ConfigError("snapshots: cannot write " + dir + "/meta.json");
    out << meta.dump(2) << "\n";
}

SnapshotSet SnapshotSet::load(const std::string& dir) {
    std::ifstream in(dir + "/meta.json");
    if (!in) throw ConfigError("snapshots: cannot read " + dir + "/meta.json");
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ConfigError("snapshots: malformed meta.json: " + std::string(e.what()));
    }

    Matrix Q = load_matrix(dir + "/Q.mrx1");
    Matrix P = load_matrix(dir + "/P.mrx1");
    Vector y_ref = load_vector(dir + "/y_ref.mrx1");

    std::vector<ParameterBlock> params;
    Index offset = 0;
    for (const auto& b : meta.at("parameters")) {
        ParameterBlock blk;
        const auto mu = b.at("mu").get<std::vector<double>>();
        blk.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Index>(mu.size()));
        blk.t0 = b.at("t0").get<double>();
        blk.dt = b.at("dt").get<double>();
        blk.num_cols = b.at("num_cols").get<Index>();
        blk.col_offset = offset;
        offset += blk.num_cols;
        params.push_back(std::move(blk));
    }

    return SnapshotSet(std::move(Q), std::move(P), PartitionedState::from_full(y_ref),
                       reference_kind_from_string(meta.at("reference_kind").get<std::string>()),
                       std::move(params), meta.at("momentum_scale").get<double>());
}

SnapshotSet generate_snapshots(const FomFamily& family, const std::vector<Vector>& parameters,
                               double dt, Index num_steps, ReferenceKind reference_kind,
                               double momentum_scale, double t0) {
    if (parameters.empty()) throw ConfigError("snapshots: no parameters given");
    if (!family.build || !family.initial_state) {
        throw ConfigError("snapshots: incomplete FOM family");
    }

    const Index cols_per_run = num_steps + 1;
    Matrix Q, P;
    std::vector<ParameterBlock> blocks;
    PartitionedState reference;

    for (std::size_t j = 0; j < parameters.size(); ++j) {
        const HamiltonianFOM fom = family.build(parameters[j]);
        const PartitionedState y0 = family.initial_state(parameters[j]);
        if (j == 0) {
            const Index n = fom.half_dim();
            Q.resize(n, cols_per_run * static_cast<Index>(parameters.size()));
            P.resize(n, Q.cols());
            reference = reference_kind == ReferenceKind::initial_condition
                            ? y0
                            : PartitionedState(Vector::Zero(n), Vector::Zero(n));
        }

        Trajectory tr = integrate_fom(fom, y0, dt, num_steps, t0);
        const Index n = fom.half_dim();
        const Index off = static_cast<Index>(j) * cols_per_run;
        Q.middleCols(off, cols_per_run) = tr.states.topRows(n);
        P.middleCols(off, cols_per_run) = tr.states.bottomRows(n);

        ParameterBlock blk;
        blk.mu = parameters[j];
        blk.t0 = t0;
        blk.dt = dt;
        blk.num_cols = cols_per_run;
        blk.col_offset = off;
        blocks.push_back(std::move(blk));
    }

    return SnapshotSet(std::move(Q), std::move(P), std::move(reference), reference_kind,
                       std::move(blocks), momentum_scale);
}

} // namespace sympmor
