#include "sympmor/integrator.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <string>

namespace sympmor {

void IntegratorConfig::validate() const {
    // Negative dt runs the flow backwards (midpoint is time-symmetric); only
    // a zero or non-finite step is malformed.
    if (!(std::abs(dt) > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("integrator: dt must be nonzero and finite");
    }
    if (num_steps < 0) throw ConfigError("integrator: negative step count");
    if (!(newton_tol > 0.0)) throw ConfigError("integrator: tolerance must be positive");
    if (newton_max_iter < 1) throw ConfigError("integrator: need at least one Newton iteration");
}

namespace {

[[noreturn]] void newton_failure(Index step, const std::string& why, double residual) {
    throw NumericalError("implicit midpoint: " + why + " at step " + std::to_string(step) +
                         " (residual " + std::to_string(residual) + ")");
}

/// One implicit-midpoint step.  `prefactored` tells the fixed_linear path
/// that the caller already factored the constant Newton matrix.
Vector step_impl(MidpointSystem& sys, const Vector& y_k, const IntegratorConfig& cfg,
                 Index step, bool prefactored, Index* iters_out) {
    const double c = 0.5 * cfg.dt;
    const Vector f_k = sys.rhs(y_k);

    if (cfg.solver == SolverKind::fixed_linear) {
        // For affine f a single Newton correction from y_k is exact:
        // (I - c J_f) delta = dt f(y_k).
        if (!sys.linear()) {
            throw ConfigError("integrator: fixed_linear solver on a nonlinear system");
        }
        if (!prefactored) sys.factor(c, y_k);
        Vector y = y_k + sys.solve(cfg.dt * f_k);
        if (!y.allFinite()) newton_failure(step, "non-finite state", 0.0);
        if (iters_out) *iters_out = 1;
        return y;
    }

    const double tol = cfg.newton_tol * (1.0 + y_k.norm());
    Vector y = y_k + cfg.dt * f_k; // explicit-Euler predictor

    if (cfg.solver == SolverKind::newton_quasi) {
        sys.factor(c, 0.5 * (y_k + y));
    }

    double g0_norm = -1.0;
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        const Vector yhat = 0.5 * (y_k + y);
        Vector g = y - y_k - cfg.dt * sys.rhs(yhat);
        const double gn = g.norm();
        if (!std::isfinite(gn)) newton_failure(step, "non-finite residual", gn);
        if (gn <= tol) {
            if (iters_out) *iters_out = it;
            return y;
        }
        if (g0_norm < 0.0) {
            g0_norm = gn;
        } else if (gn > cfg.divergence_factor * g0_norm) {
            newton_failure(step, "Newton divergence", gn);
        }
        if (cfg.solver == SolverKind::newton_exact) sys.factor(c, yhat);
        y -= sys.solve(g);
    }
    const Vector yhat = 0.5 * (y_k + y);
    newton_failure(step, "Newton did not converge within " +
                          std::to_string(cfg.newton_max_iter) + " iterations",
                   (y - y_k - cfg.dt * sys.rhs(yhat)).norm());
}

} // namespace

Vector midpoint_step(MidpointSystem& sys, const Vector& y_k, const IntegratorConfig& cfg,
                     Index step_index) {
    cfg.validate();
    detail::require_size(y_k, sys.dim(), "integrator state");
    return step_impl(sys, y_k, cfg, step_index, /*prefactored=*/false, nullptr);
}

Trajectory integrate(MidpointSystem& sys, const Vector& y0, const IntegratorConfig& cfg,
                     double t0) {
    cfg.validate();
    detail::require_size(y0, sys.dim(), "integrator initial state");

    Trajectory tr;
    tr.dt = cfg.dt;
    tr.t0 = t0;
    tr.states.resize(sys.dim(), cfg.num_steps + 1);
    tr.times.resize(cfg.num_steps + 1);
    tr.states.col(0) = y0;
    tr.times(0) = t0;

    const bool prefactor = cfg.solver == SolverKind::fixed_linear;
    if (prefactor) {
        if (!sys.linear()) {
            throw ConfigError("integrator: fixed_linear solver on a nonlinear system");
        }
        sys.factor(0.5 * cfg.dt, y0);
    }

    Vector y = y0;
    for (Index k = 1; k <= cfg.num_steps; ++k) {
        Index iters = 0;
        y = step_impl(sys, y, cfg, k, prefactor, &iters);
        tr.states.col(k) = y;
        tr.times(k) = t0 + static_cast<double>(k) * cfg.dt;
        tr.total_newton_iters += iters;
        tr.max_newton_iters = std::max(tr.max_newton_iters, iters);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// FOM adapter
// ---------------------------------------------------------------------------

FomMidpointSystem::FomMidpointSystem(const HamiltonianFOM& fom) : fom_(fom) {
    SparseMatrix I(fom.half_dim(), fom.half_dim());
    I.setIdentity();
    hp_is_identity_ = SparseMatrix(fom.Hp() - I).norm() == 0.0;
}

void FomMidpointSystem::factor(double c, const Vector& yhat) {
    detail::require_size(yhat, dim(), "midpoint factor state");
    const Index n = fom_.half_dim();
    c_ = c;

    // W = Hq + 3 c3 diag(qhat.^2).  The shifted block system
    //   [[I, -c Hp], [c W, I]]
    // reduces, for Hp = I (all wave operators), to the SPD Schur complement
    //   (I + c^2 W) dq = b_q + c b_p,   dp = b_p - c W dq,
    // handled by a sparse Cholesky factorization whose symbolic analysis is
    // reused across steps.  General Hp falls back to a sparse LU of the full
    // block matrix.
    W_ = fom_.Hq();
    if (fom_.kind() == FomKind::nonlinear_cubic) {
        const auto q = yhat.head(n);
        SparseMatrix D(n, n);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            trips.emplace_back(i, i, 3.0 * fom_.cubic_coefficient() * q(i) * q(i));
        }
        D.setFromTriplets(trips.begin(), trips.end());
        W_ = W_ + D;
    }

    if (hp_is_identity_) {
        SparseMatrix I(n, n);
        I.setIdentity();
        SparseMatrix S = I + (c * c) * W_;
        if (!analyzed_) {
            llt_.analyzePattern(S);
            analyzed_ = true;
        }
        llt_.factorize(S);
        if (llt_.info() != Eigen::Success) {
            throw NumericalError("implicit midpoint: shifted FOM matrix is not positive definite");
        }
        return;
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(2 * n + fom_.Hp().nonZeros() + W_.nonZeros()));
    for (Index i = 0; i < 2 * n; ++i) trips.emplace_back(i, i, 1.0);
    for (Index k = 0; k < fom_.Hp().outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(fom_.Hp(), k); it; ++it) {
            trips.emplace_back(it.row(), n + it.col(), -c * it.value());
        }
    }
    for (Index k = 0; k < W_.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(W_, k); it; ++it) {
            trips.emplace_back(n + it.row(), it.col(), c * it.value());
        }
    }
    SparseMatrix K(2 * n, 2 * n);
    K.setFromTriplets(trips.begin(), trips.end());
    lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_->compute(K);
    if (lu_->info() != Eigen::Success) {
        throw NumericalError("implicit midpoint: shifted FOM matrix is singular");
    }
}

Vector FomMidpointSystem::solve(const Vector& b) const {
    const Index n = fom_.half_dim();
    detail::require_size(b, 2 * n, "midpoint solve rhs");
    if (!hp_is_identity_) {
        return lu_->solve(b);
    }
    // Schur solve of [[I, -c I], [c W, I]] d = b.
    const auto b_q = b.head(n);
    const auto b_p = b.tail(n);
    Vector d_q = llt_.solve(b_q + c_ * b_p);
    Vector d_p = b_p - c_ * (W_ * d_q);
    Vector d(2 * n);
    d.head(n) = d_q;
    d.tail(n) = d_p;
    return d;
}

// ---------------------------------------------------------------------------
// Dense adapter
// ---------------------------------------------------------------------------

DenseMidpointSystem::DenseMidpointSystem(Index dim, RhsFn rhs, JacFn jacobian, bool is_linear)
    : dim_(dim), rhs_(std::move(rhs)), jac_(std::move(jacobian)), linear_(is_linear) {}

void DenseMidpointSystem::factor(double c, const Vector& yhat) {
    Matrix A = -c * jac_(yhat);
    A.diagonal().array() += 1.0;
    lu_.compute(A);
}

Vector DenseMidpointSystem::solve(const Vector& b) const {
    return lu_.solve(b);
}

// ---------------------------------------------------------------------------
// FOM drivers
// ---------------------------------------------------------------------------

namespace {

IntegratorConfig fom_integrator_config(const HamiltonianFOM& fom, double dt, Index num_steps) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.num_steps = num_steps;
    cfg.solver = fom.kind() == FomKind::linear_separable ? SolverKind::fixed_linear
                                                         : SolverKind::newton_exact;
    return cfg;
}

} // namespace

Trajectory integrate_fom(const HamiltonianFOM& fom, const PartitionedState& y0, double dt,
                         Index num_steps, double t0) {
    FomMidpointSystem sys(fom);
    return integrate(sys, y0.to_full(), fom_integrator_config(fom, dt, num_steps), t0);
}

void stream_fom_trajectory(const HamiltonianFOM& fom, const PartitionedState& y0, double dt,
                           Index num_steps,
                           const std::function<void(Index, const Vector&)>& visit) {
    FomMidpointSystem sys(fom);
    const IntegratorConfig cfg = fom_integrator_config(fom, dt, num_steps);
    cfg.validate();

    Vector y = y0.to_full();
    visit(0, y);
    const bool prefactor = cfg.solver == SolverKind::fixed_linear;
    if (prefactor) sys.factor(0.5 * cfg.dt, y);
    for (Index k = 1; k <= num_steps; ++k) {
        y = step_impl(sys, y, cfg, k, prefactor, nullptr);
        visit(k, y);
    }
}

} // namespace sympmor
