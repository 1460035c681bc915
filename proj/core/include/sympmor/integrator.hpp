#pragma once

#include "sympmor/hamiltonian.hpp"
#include "sympmor/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>

namespace sympmor {

/// How the implicit-midpoint Newton matrix I - dt/2 J_f is handled.
enum class SolverKind {
    fixed_linear, ///< constant vector field: factor once, one solve per step
    newton_exact, ///< re-factor at every Newton iterate
    newton_quasi, ///< factor once per step at the predicted midpoint
};

struct IntegratorConfig {
    double dt = 0.0;
    Index num_steps = 0;
    SolverKind solver = SolverKind::newton_exact;
    double newton_tol = 1e-12;    ///< on ||g|| <= tol (1 + ||y_k||)
    int newton_max_iter = 50;
    double divergence_factor = 1e6; ///< abort when ||g|| exceeds this times ||g0||

    void validate() const;
};

struct Trajectory {
    Matrix states;     ///< dim x (num_steps + 1), column k is y(t0 + k dt)
    Vector times;      ///< num_steps + 1 time stamps
    double dt = 0.0;
    double t0 = 0.0;
    Index total_newton_iters = 0;
    Index max_newton_iters = 0; ///< worst single step
};

/// Newton failure mid-run.  Carries the states computed before the fatal
/// step so callers can still evaluate the surviving prefix (an unstable run
/// is an observation, not a dead end).
class IntegrationFailure : public NumericalError {
public:
    IntegrationFailure(const std::string& what, Trajectory prefix)
        : NumericalError(what), partial(std::move(prefix)) {}

    Trajectory partial; ///< states up to and including the last good step
};

/// What the implicit-midpoint integrator needs from a dynamical system:
/// the vector field plus a shifted-Jacobian factorization
/// (I - c J_f(yhat)) z = b used by the Newton correction.
class MidpointSystem {
public:
    virtual ~MidpointSystem() = default;

    virtual Index dim() const = 0;
    virtual Vector rhs(const Vector& y) const = 0;

    /// True when rhs is affine in y, enabling the fixed_linear solver.
    virtual bool linear() const { return false; }

    /// Factor I - c J_f(yhat); subsequent solve() calls use this factor.
    virtual void factor(double c, const Vector& yhat) = 0;
    virtual Vector solve(const Vector& b) const = 0;
};

/// Advance num_steps implicit-midpoint steps from y0.  Each step solves
///   y+ = y_k + dt f((y_k + y+)/2)
/// by Newton iteration from an explicit-Euler predictor (for fixed_linear the
/// single correction is exact).  Throws NumericalError when Newton exceeds
/// max iterations, diverges, or produces non-finite values; the message
/// carries the failing step index and residual norm.
Trajectory integrate(MidpointSystem& system, const Vector& y0,
                     const IntegratorConfig& cfg, double t0 = 0.0);

/// Run one implicit-midpoint step (same Newton scheme); used by tests and by
/// streaming drivers that do not want to store a full trajectory.
Vector midpoint_step(MidpointSystem& system, const Vector& y_k,
                     const IntegratorConfig& cfg, Index step_index = 0);

// ---------------------------------------------------------------------------
// Adapters
// ---------------------------------------------------------------------------

/// Midpoint system for a HamiltonianFOM.  The shifted system
///   [[I, -cI], [c W, I]],  W = Hq + 3 c3 diag(qhat.^2),
/// is reduced to its Schur complement (I + c^2 W), which is symmetric
/// positive definite for the wave operators and solved by a sparse Cholesky
/// factorization whose symbolic analysis is done once.
class FomMidpointSystem : public MidpointSystem {
public:
    explicit FomMidpointSystem(const HamiltonianFOM& fom);

    Index dim() const override { return 2 * fom_.half_dim(); }
    Vector rhs(const Vector& y) const override { return fom_.rhs(y); }
    bool linear() const override { return fom_.kind() == FomKind::linear_separable; }
    void factor(double c, const Vector& yhat) override;
    Vector solve(const Vector& b) const override;

private:
    const HamiltonianFOM& fom_;
    Eigen::SimplicialLLT<SparseMatrix> llt_;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_; ///< fallback for Hp != I
    SparseMatrix W_;  ///< Hq + 3 c3 diag(qhat.^2) of the last factor
    double c_ = 0.0;
    bool analyzed_ = false;
    bool hp_is_identity_ = false;
};

/// Midpoint system for a dense vector field given by callbacks; the Newton
/// matrix is formed densely and LU-factored.  Workhorse for reduced models
/// and small test systems.
class DenseMidpointSystem : public MidpointSystem {
public:
    using RhsFn = std::function<Vector(const Vector&)>;
    using JacFn = std::function<Matrix(const Vector&)>;

    DenseMidpointSystem(Index dim, RhsFn rhs, JacFn jacobian, bool is_linear = false);

    Index dim() const override { return dim_; }
    Vector rhs(const Vector& y) const override { return rhs_(y); }
    bool linear() const override { return linear_; }
    void factor(double c, const Vector& yhat) override;
    Vector solve(const Vector& b) const override;

private:
    Index dim_;
    RhsFn rhs_;
    JacFn jac_;
    bool linear_;
    Eigen::PartialPivLU<Matrix> lu_;
};

/// Integrate a FOM with the structured solver and sensible defaults
/// (fixed_linear for quadratic Hamiltonians, newton_exact otherwise).
Trajectory integrate_fom(const HamiltonianFOM& fom, const PartitionedState& y0,
                         double dt, Index num_steps, double t0 = 0.0);

/// Walk a FOM trajectory without storing it: visit(k, y_k) is called for
/// k = 0..num_steps with the current flat state.
void stream_fom_trajectory(const HamiltonianFOM& fom, const PartitionedState& y0,
                           double dt, Index num_steps,
                           const std::function<void(Index, const Vector&)>& visit);

} // namespace sympmor
