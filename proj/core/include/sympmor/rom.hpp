#pragma once

#include "sympmor/hamiltonian.hpp"
#include "sympmor/integrator.hpp"
#include "sympmor/mapping.hpp"

#include <optional>
#include <string>

namespace sympmor {

/// Reduced dynamical models zdot = f~(z) on R^{2r}.
enum class RomKind {
    lsl,         ///< symplectic Galerkin on the linear symplectic lift
    smg_qmcl,    ///< symplectic manifold Galerkin on the qmcl manifold
    galerkin_bq, ///< plain Galerkin on the blockwise-quadratic manifold
    naive_qm,    ///< plain Galerkin on a joint quadratic manifold (baseline)
};

std::string to_string(RomKind k);
RomKind rom_kind_from_string(const std::string& s);

/// A reduced model.  For quadratic full-order Hamiltonians all reduced
/// operators are precomputed offline and the online right-hand side never
/// touches dimension n (O(r^3) for lsl/bq, O(r^5) for smg_qmcl).  For
/// nonlinear FOMs the right-hand side lifts to full space, evaluates the FOM
/// vector field, and projects back.
///
/// rhs_jacobian is the exact analytic Jacobian for lsl, galerkin_bq, and
/// naive_qm.  For smg_qmcl it is the Gauss-Newton approximation that drops
/// the curvature of the decoder (the standard choice for integrating this
/// model); rhs itself is always exact.
class ReducedModel {
public:
    ReducedModel() = default;

    RomKind kind() const { return kind_; }
    /// Half the reduced dimension: z lives in R^{2r}.
    Index r() const { return r_; }
    Index dim() const { return 2 * r_; }
    bool offline_online() const { return offline_online_; }

    Vector rhs(const Vector& z) const;
    Matrix rhs_jacobian(const Vector& z) const;

    /// True when rhs is affine in z (lsl over a quadratic Hamiltonian).
    bool linear_rhs() const { return kind_ == RomKind::lsl && offline_online_; }

    /// Newton policy matched to the model: fixed_linear for affine rhs,
    /// newton_quasi for smg_qmcl, newton_exact otherwise.
    SolverKind default_solver() const;

    /// Lift a reduced state to full phase space.
    PartitionedState decode_state(const Vector& z) const;

    /// The state approximation behind this model (not available for
    /// naive_qm, which uses the joint map below).
    const Mapping& mapping() const;
    const JointQuadraticMap& joint_map() const;

    /// Persist operators + mapping to a directory with a manifest.json.
    void save(const std::string& dir) const;
    static ReducedModel load(const std::string& dir);

    friend ReducedModel build_lsl_rom(const HamiltonianFOM&, const Mapping&);
    friend ReducedModel build_bq_rom(const HamiltonianFOM&, const Mapping&);
    friend ReducedModel build_qmcl_rom(const HamiltonianFOM&, const Mapping&);
    friend ReducedModel build_naive_qm_rom(const HamiltonianFOM&, const JointQuadraticMap&);

private:
    RomKind kind_ = RomKind::lsl;
    Index r_ = 0;
    bool offline_online_ = false;

    Mapping mapping_;                 // lsl / bq / qmcl
    JointQuadraticMap joint_;         // naive_qm
    std::optional<HamiltonianFOM> fom_; // kept only for nonlinear FOMs

    // Offline operators for quadratic Hamiltonians, in position/momentum
    // blocks.  Naming: A* = Phi^T H* Phi, b* = Phi^T H* (*_ref).
    Vector bq_, bp_;
    Matrix Aq_, Ap_;
    // galerkin_bq:  Cq = Phi^T Hq Vbar_q, Cp = Phi^T Hp Vbar_p.
    // smg_qmcl:     Cq = Phi^T Hq Vbar_q, Cp = Phi^T Hp Vbar_q, plus the
    //               Vbar_q-side blocks below.
    Matrix Cq_, Cp_;
    Matrix Gq_, Gp_;                  // Vbar_q^T H* Vbar_q (smg_qmcl)
    Vector cq_, cp_;                  // Vbar_q^T H* (*_ref)  (smg_qmcl)

    // naive_qm operators on the joint map: zdot = b + A z + C (z (x) z).
    Vector nb_;
    Matrix nA_, nC_;

    Vector rhs_offline(const Vector& z) const;
    Vector rhs_lifted(const Vector& z) const;
    Matrix jacobian_offline(const Vector& z) const;
    Matrix jacobian_lifted(const Vector& z) const;
};

/// Symplectic Galerkin ROM on the linear symplectic lift; mapping.kind()
/// must be lsl.
ReducedModel build_lsl_rom(const HamiltonianFOM& fom, const Mapping& mapping);

/// Plain Galerkin ROM on the blockwise-quadratic manifold (the blkdiag basis
/// is a left inverse of the decoder Jacobian); mapping.kind() must be bq.
ReducedModel build_bq_rom(const HamiltonianFOM& fom, const Mapping& mapping);

/// Symplectic manifold Galerkin ROM on the qmcl manifold: zdot =
/// J_{2r} DGamma(z)^T grad H(Gamma(z)); mapping.kind() must be qmcl.
ReducedModel build_qmcl_rom(const HamiltonianFOM& fom, const Mapping& mapping);

/// Plain Galerkin ROM on a joint quadratic map over full phase space,
/// restricted to quadratic Hamiltonians.  Baseline without symplectic
/// structure.
ReducedModel build_naive_qm_rom(const HamiltonianFOM& fom, const JointQuadraticMap& map);

/// Free-function veneer mirroring the member calls.
inline Vector rom_rhs(const ReducedModel& rm, const Vector& z) { return rm.rhs(z); }
inline Matrix rom_rhs_jacobian(const ReducedModel& rm, const Vector& z) {
    return rm.rhs_jacobian(z);
}

/// Wrap a reduced model for the implicit-midpoint integrator.
DenseMidpointSystem make_rom_system(const ReducedModel& rm);

/// Integrate a reduced model with its default solver.
/// Decode a matrix of reduced states column-wise through the model's mapping.
Matrix decode_trajectory(const ReducedModel& rm, const Matrix& Z);

Trajectory integrate_rom(const ReducedModel& rm, const Vector& z0, double dt,
                         Index num_steps, double t0 = 0.0);

} // namespace sympmor
