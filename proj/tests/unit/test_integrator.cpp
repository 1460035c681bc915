#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace sympmor;
using namespace testsup;

namespace {

/// Harmonic oscillator qdot = p, pdot = -q as a dense midpoint system.
DenseMidpointSystem oscillator() {
    Matrix A(2, 2);
    A << 0.0, 1.0, -1.0, 0.0;
    return DenseMidpointSystem(
        2, [A](const Vector& y) { return Vector(A * y); },
        [A](const Vector& y) {
            (void)y;
            return A;
        },
        /*is_linear=*/true);
}

IntegratorConfig config(double dt, Index steps, SolverKind solver) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.num_steps = steps;
    cfg.solver = solver;
    return cfg;
}

} // namespace

TEST_SUITE("integrator") {

TEST_CASE("one oscillator step is the Cayley rotation") {
    // Midpoint on ydot = A y is the Cayley map (I - dt/2 A)^{-1} (I + dt/2 A):
    // for dt = 0.1, y0 = (1, 0) the closed form gives
    //   q1 = (1 - dt^2/4) / (1 + dt^2/4),  p1 = -dt / (1 + dt^2/4).
    const double q1_expected = 0.995012468827930; // (1 - 0.0025) / (1 + 0.0025)
    const double p1_expected = -0.0997506234413965;

    Vector y0(2);
    y0 << 1.0, 0.0;

    for (SolverKind solver :
         {SolverKind::fixed_linear, SolverKind::newton_exact, SolverKind::newton_quasi}) {
        // The direct linear solve hits machine precision; the Newton loops
        // stop at the 1e-12 relative residual tolerance.
        const double eps = solver == SolverKind::fixed_linear ? 1e-13 : 5e-12;
        auto sys = oscillator();
        const Trajectory tr = integrate(sys, y0, config(0.1, 1, solver));
        CHECK(tr.states.col(1)(0) == doctest::Approx(q1_expected).epsilon(eps));
        CHECK(tr.states.col(1)(1) == doctest::Approx(p1_expected).epsilon(eps));
    }

    auto sys = oscillator();
    const Vector y1 = midpoint_step(sys, y0, config(0.1, 1, SolverKind::newton_exact));
    CHECK(y1(0) == doctest::Approx(q1_expected).epsilon(5e-12));
}

TEST_CASE("zero vector field keeps the state constant") {
    DenseMidpointSystem sys(
        3, [](const Vector& y) { return Vector(Vector::Zero(y.size())); },
        [](const Vector& y) { return Matrix(Matrix::Zero(y.size(), y.size())); }, true);
    std::mt19937_64 gen(61);
    const Vector y0 = random_vector(3, gen);
    const Trajectory tr = integrate(sys, y0, config(0.25, 20, SolverKind::fixed_linear));
    for (Index k = 0; k <= 20; ++k) CHECK((tr.states.col(k) - y0).norm() == 0.0);
}

TEST_CASE("trajectory bookkeeping: times, initial column, iteration counts") {
    auto sys = oscillator();
    Vector y0(2);
    y0 << 0.3, -0.2;
    const Trajectory tr = integrate(sys, y0, config(0.05, 40, SolverKind::fixed_linear), 1.5);
    REQUIRE(tr.states.cols() == 41);
    REQUIRE(tr.times.size() == 41);
    CHECK(tr.states.col(0) == y0);
    CHECK(tr.t0 == 1.5);
    CHECK(tr.dt == 0.05);
    for (Index k = 0; k <= 40; ++k) {
        CHECK(tr.times(k) == doctest::Approx(1.5 + 0.05 * static_cast<double>(k)).epsilon(1e-15));
    }
    // fixed_linear performs exactly one solve per step.
    CHECK(tr.total_newton_iters == 40);
    CHECK(tr.max_newton_iters == 1);
}

TEST_CASE("global error on the oscillator shrinks at second order") {
    Vector y0(2);
    y0 << 1.0, 0.0;
    std::vector<double> errors;
    for (double dt : {0.02, 0.01, 0.005}) {
        auto sys = oscillator();
        const Index steps = static_cast<Index>(std::llround(1.0 / dt));
        const Trajectory tr = integrate(sys, y0, config(dt, steps, SolverKind::fixed_linear));
        Vector exact(2);
        exact << std::cos(1.0), -std::sin(1.0);
        errors.push_back((tr.states.col(steps) - exact).norm());
    }
    const double order1 = std::log2(errors[0] / errors[1]);
    const double order2 = std::log2(errors[1] / errors[2]);
    CHECK(order1 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(order2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("backward integration with negated dt returns to the start") {
    SUBCASE("linear wave chain") {
        Wave1DConfig cfg;
        cfg.n = 64;
        const HamiltonianFOM fom = build_wave1d(cfg);
        const PartitionedState y0 = wave1d_initial_state(cfg);
        const Trajectory fwd = integrate_fom(fom, y0, 1e-3, 500);
        const PartitionedState mid = PartitionedState::from_full(fwd.states.col(500));
        const Trajectory bwd = integrate_fom(fom, mid, -1e-3, 500);
        CHECK((bwd.states.col(500) - y0.to_full()).norm() <=
              1e-8 * std::max(1.0, y0.to_full().norm()));
    }
    SUBCASE("nonlinear system with exact Newton") {
        Wave2DConfig cfg;
        cfg.nx = 8;
        cfg.ny = 8;
        cfg.mu = 1.0;
        const HamiltonianFOM fom = build_wave2d(cfg);
        const PartitionedState y0 = wave2d_initial_state(cfg);
        const Trajectory fwd = integrate_fom(fom, y0, 0.05, 100);
        const PartitionedState mid = PartitionedState::from_full(fwd.states.col(100));
        const Trajectory bwd = integrate_fom(fom, mid, -0.05, 100);
        CHECK((bwd.states.col(100) - y0.to_full()).norm() <= 1e-8 * y0.to_full().norm());
    }
}

TEST_CASE("quadratic invariants are conserved to solver tolerance") {
    Wave1DConfig cfg;
    cfg.n = 256;
    cfg.mu = 0.5;
    const HamiltonianFOM fom = build_wave1d(cfg);
    const Trajectory tr = integrate_fom(fom, wave1d_initial_state(cfg), 1e-3, 4000);
    const double h0 = fom.energy(Vector(tr.states.col(0)));
    double worst = 0.0;
    for (Index k = 0; k < tr.states.cols(); k += 10) {
        worst = std::max(worst, std::abs(fom.energy(Vector(tr.states.col(k))) - h0));
    }
    CHECK(worst <= 1e-9 * std::abs(h0));
}

TEST_CASE("structured FOM solver agrees with the dense fallback") {
    SUBCASE("linear 1D chain") {
        Wave1DConfig cfg;
        cfg.n = 16;
        const HamiltonianFOM fom = build_wave1d(cfg);
        const Vector y0 = wave1d_initial_state(cfg).to_full();

        FomMidpointSystem structured(fom);
        DenseMidpointSystem dense(
            2 * cfg.n, [&fom](const Vector& y) { return fom.rhs(y); },
            [&fom, &cfg](const Vector& y) {
                const Matrix H = Matrix(fom.hessian_dyn(y));
                return Matrix(canonical_J_dense(2 * cfg.n) * H);
            },
            true);

        const auto cfg_run = config(2e-3, 200, SolverKind::fixed_linear);
        const Trajectory a = integrate(structured, y0, cfg_run);
        const Trajectory b = integrate(dense, y0, cfg_run);
        CHECK((a.states - b.states).norm() <= 1e-11 * b.states.norm());
    }
    SUBCASE("nonlinear 2D plane") {
        Wave2DConfig cfg;
        cfg.nx = 6;
        cfg.ny = 6;
        cfg.mu = 0.9;
        const HamiltonianFOM fom = build_wave2d(cfg);
        const Vector y0 = wave2d_initial_state(cfg).to_full();
        const Index dim = 2 * fom.half_dim();

        FomMidpointSystem structured(fom);
        DenseMidpointSystem dense(
            dim, [&fom](const Vector& y) { return fom.rhs(y); },
            [&fom, dim](const Vector& y) {
                return Matrix(canonical_J_dense(dim) * Matrix(fom.hessian_dyn(y)));
            },
            false);

        const auto cfg_run = config(0.05, 40, SolverKind::newton_exact);
        const Trajectory a = integrate(structured, y0, cfg_run);
        const Trajectory b = integrate(dense, y0, cfg_run);
        CHECK((a.states - b.states).norm() <= 1e-9 * b.states.norm());
    }
}

TEST_CASE("newton failure carries the step index and is a numerical error") {
    // Midpoint for ydot = y^2 with a large step has no real solution:
    // y+ = y + dt ((y + y+)/2)^2 leads to a negative discriminant.
    DenseMidpointSystem sys(
        1, [](const Vector& y) { return Vector(y.array().square().matrix()); },
        [](const Vector& y) { return Matrix(Matrix::Constant(1, 1, 2.0 * y(0))); }, false);
    Vector y0(1);
    y0 << 1.0;
    CHECK_THROWS_WITH_AS(integrate(sys, y0, config(10.0, 3, SolverKind::newton_exact)),
                         doctest::Contains("step"), NumericalError);
}

TEST_CASE("fixed_linear refuses nonlinear systems") {
    Wave2DConfig cfg;
    cfg.nx = 4;
    cfg.ny = 4;
    const HamiltonianFOM fom = build_wave2d(cfg);
    FomMidpointSystem sys(fom);
    const Vector y0 = Vector::Zero(2 * fom.half_dim());
    CHECK_THROWS_AS(integrate(sys, y0, config(0.1, 1, SolverKind::fixed_linear)), ConfigError);
}

TEST_CASE("config validation") {
    auto sys = oscillator();
    const Vector y0 = Vector::Zero(2);
    CHECK_THROWS_AS(integrate(sys, y0, config(0.0, 1, SolverKind::newton_exact)), ConfigError);
    IntegratorConfig bad = config(0.1, -1, SolverKind::newton_exact);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = config(0.1, 1, SolverKind::newton_exact);
    bad.newton_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = config(0.1, 1, SolverKind::newton_exact);
    bad.newton_max_iter = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    // Negative dt is a valid backward run.
    CHECK_NOTHROW(config(-0.1, 1, SolverKind::newton_exact).validate());
}

} // TEST_SUITE
