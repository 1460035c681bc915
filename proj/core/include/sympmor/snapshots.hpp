#pragma once

#include "sympmor/hamiltonian.hpp"
#include "sympmor/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sympmor {

/// Choice of the reference state subtracted from snapshots before fitting.
enum class ReferenceKind {
    zero,              ///< y_ref = 0
    initial_condition, ///< y_ref = y(t0) of the first parameter
};

std::string to_string(ReferenceKind k);
ReferenceKind reference_kind_from_string(const std::string& s);

/// One contiguous block of snapshot columns from a single parameter run.
struct ParameterBlock {
    Vector mu;        ///< parameter vector of the run
    double t0 = 0.0;
    double dt = 0.0;
    Index num_cols = 0;
    Index col_offset = 0; ///< first column of this block in Q/P
};

/// A parametrized FOM family: how to build the operator set and the initial
/// state for a given parameter vector.
struct FomFamily {
    std::function<HamiltonianFOM(const Vector& mu)> build;
    std::function<PartitionedState(const Vector& mu)> initial_state;
};

/// Snapshot matrices of position and momentum trajectories collected over a
/// set of parameters, together with the reference state and the momentum
/// scaling used when forming the extended data matrix (Q, gamma P).
///
/// Raw (uncentered) snapshots are stored; centered views are materialized on
/// first use so that re-adding the reference recovers the raw data exactly.
class SnapshotSet {
public:
    SnapshotSet() = default;
    SnapshotSet(Matrix Q_raw, Matrix P_raw, PartitionedState reference,
                ReferenceKind reference_kind, std::vector<ParameterBlock> params,
                double momentum_scale = 1.0);

    Index half_dim() const { return Q_raw_.rows(); }
    Index num_cols() const { return Q_raw_.cols(); }
    const std::vector<ParameterBlock>& parameters() const { return params_; }
    const PartitionedState& reference() const { return ref_; }
    ReferenceKind reference_kind() const { return ref_kind_; }
    double momentum_scale() const { return momentum_scale_; }

    const Matrix& Q_raw() const { return Q_raw_; }
    const Matrix& P_raw() const { return P_raw_; }

    /// Centered snapshots Q_raw - q_ref 1^T (built lazily, cached).
    const Matrix& Q() const;
    const Matrix& P() const;

    /// Materialize the extended matrix (Q, gamma P) of size n x 2 n_s.  Meant
    /// for small problems and tests; the basis fitting works from Gram
    /// matrices instead.
    Matrix extended_matrix() const;

    /// Persist as Q.mrx1 / P.mrx1 / y_ref.mrx1 plus a meta.json sidecar in
    /// the given directory (created if needed).
    void save(const std::string& dir) const;
    static SnapshotSet load(const std::string& dir);

private:
    Matrix Q_raw_;
    Matrix P_raw_;
    PartitionedState ref_;
    ReferenceKind ref_kind_ = ReferenceKind::zero;
    std::vector<ParameterBlock> params_;
    double momentum_scale_ = 1.0;

    mutable Matrix Q_c_;
    mutable Matrix P_c_;
    mutable bool centered_built_ = false;
    bool reference_is_zero_ = true;
};

/// Integrate the family at each parameter with implicit midpoint and collect
/// all states (including the initial one: num_steps + 1 columns per run).
SnapshotSet generate_snapshots(const FomFamily& family,
                               const std::vector<Vector>& parameters,
                               double dt, Index num_steps,
                               ReferenceKind reference_kind,
                               double momentum_scale = 1.0, double t0 = 0.0);

} // namespace sympmor
