#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace sympmor;
using namespace testsup;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Relative L2(dx) error of the position block against a reference.
double q_error_l2(const PartitionedState& a, const PartitionedState& b, double dx) {
    return std::sqrt(dx) * (a.q - b.q).norm();
}

/// One-cell circular shift (in +x) of a flattened 2D field.
Vector shift_x(const Vector& field, const Wave2DConfig& cfg) {
    Vector out(field.size());
    for (Index j = 0; j < cfg.ny; ++j) {
        for (Index i = 0; i < cfg.nx; ++i) {
            out(cfg.flat((i + 1) % cfg.nx, j)) = field(cfg.flat(i, j));
        }
    }
    return out;
}

} // namespace

TEST_SUITE("wave") {

TEST_CASE("1D operator has the textbook Dirichlet stencil") {
    Wave1DConfig cfg;
    cfg.n = 3;
    cfg.mu = 1.0;
    const HamiltonianFOM fom = build_wave1d(cfg);
    const Matrix Hq = Matrix(fom.Hq());
    const double s = 1.0 / (cfg.dx() * cfg.dx()); // Hq = -mu^2 D = mu^2/dx^2 tridiag(-1,2,-1)

    CHECK(Hq(0, 0) == doctest::Approx(2.0 * s).epsilon(1e-14));
    CHECK(Hq(0, 1) == doctest::Approx(-s).epsilon(1e-14));
    CHECK(Hq(0, 2) == 0.0);
    CHECK(rel_diff(Hq, Matrix(Hq.transpose())) == 0.0);

    // Hp is the identity.
    CHECK(rel_diff(Matrix(fom.Hp()), Matrix(Matrix::Identity(3, 3))) == 0.0);
    CHECK(fom.quadrature_weight() == doctest::Approx(cfg.dx()).epsilon(1e-15));
    CHECK(fom.kind() == FomKind::linear_separable);
}

TEST_CASE("Dirichlet closure breaks constant-field stationarity at the boundary only") {
    Wave1DConfig cfg;
    cfg.n = 32;
    cfg.mu = 1.0;
    const HamiltonianFOM fom = build_wave1d(cfg);
    const Vector Dq = -Vector(fom.Hq() * Vector::Ones(cfg.n)); // D * 1 (mu = 1)
    const double scale = 1.0 / (cfg.dx() * cfg.dx());
    for (Index i = 1; i + 1 < cfg.n; ++i) CHECK(std::abs(Dq(i)) <= 1e-12 * scale);
    CHECK(std::abs(Dq(0)) > 0.1 * scale);
    CHECK(std::abs(Dq(cfg.n - 1)) > 0.1 * scale);
}

TEST_CASE("lowest Dirichlet eigenvalue approaches (k pi)^2") {
    Wave1DConfig cfg;
    cfg.n = 256;
    cfg.mu = 1.0; // Hq = -D
    const HamiltonianFOM fom = build_wave1d(cfg);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(fom.Hq()));
    REQUIRE(eig.info() == Eigen::Success);
    const double lambda1 = eig.eigenvalues()(0);

    // Continuum limit.
    CHECK(rel_diff(lambda1, kPi * kPi) < 1e-4);
    // Exact discrete spectrum of the (-1,2,-1)/dx^2 operator.
    const double dx = cfg.dx();
    const double discrete = 4.0 / (dx * dx) * std::pow(std::sin(kPi * dx / 2.0), 2);
    CHECK(rel_diff(lambda1, discrete) < 1e-10);
    // Positive semidefinite energy form.
    CHECK(lambda1 > 0.0);
}

TEST_CASE("spline bump values and continuity") {
    CHECK(spline_bump(0.0) == 1.0);
    CHECK(spline_bump(2.0) == 0.0);
    CHECK(spline_bump(2.5) == 0.0);
    // Both branches give 1/4 at s = 1.
    CHECK(spline_bump(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(spline_bump(1.0 - 1e-9) == doctest::Approx(0.25).epsilon(1e-6));

    // Derivative matches finite differences away from the knots.
    for (double s : {0.3, 0.7, 1.2, 1.8}) {
        const double h = 1e-7;
        const double fd = (spline_bump(s + h) - spline_bump(s - h)) / (2.0 * h);
        CHECK(rel_diff(fd, spline_bump_derivative(s)) < 1e-6);
    }
}

TEST_CASE("initial pulse: peak value, support, and analytic momentum") {
    Wave1DConfig cfg;
    cfg.n = 199; // dx = 1/200, so x = -0.5 + mu/2 = -0.25 is the node i = 49
    cfg.mu = 0.5;
    const PartitionedState y0 = wave1d_initial_state(cfg);

    CHECK(y0.q(49) == doctest::Approx(1.0).epsilon(1e-14));

    // Support is exactly [-0.5, -0.5 + mu]: zero at and beyond x = 0.
    for (Index i = 0; i < cfg.n; ++i) {
        if (cfg.node(i) >= -0.5 + cfg.mu) CHECK(y0.q(i) == 0.0);
    }
    CHECK(y0.q.maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));

    // p0 = -mu dq0/dx with the chain rule applied to the spline argument
    // s(x) = 4|x + 1/2 - mu/2| / mu.
    for (Index i = 0; i < cfg.n; i += 7) {
        const double x = cfg.node(i);
        const double arg = x + 0.5 - cfg.mu / 2.0;
        const double s = 4.0 * std::abs(arg) / cfg.mu;
        const double ds_dx = (arg >= 0.0 ? 4.0 : -4.0) / cfg.mu;
        const double expected = -cfg.mu * spline_bump_derivative(s) * ds_dx;
        CHECK(std::abs(y0.p(i) - expected) < 1e-13);
    }
}

TEST_CASE("exact solution translates the pulse and guards the validity window") {
    Wave1DConfig cfg;
    cfg.n = 400;
    cfg.mu = 0.5;

    const PartitionedState y0 = wave1d_initial_state(cfg);
    const PartitionedState at0 = wave1d_exact_solution(cfg, 0.0);
    CHECK((at0.q - y0.q).norm() == 0.0);
    CHECK((at0.p - y0.p).norm() == 0.0);

    // At t = 0.2 the support is [-0.4, 0.1].
    const PartitionedState at = wave1d_exact_solution(cfg, 0.2);
    double mass_inside = 0.0;
    for (Index i = 0; i < cfg.n; ++i) {
        const double x = cfg.node(i);
        if (x <= -0.4 - 1e-9 || x >= 0.1 + 1e-9) {
            CHECK(at.q(i) == 0.0);
        } else {
            mass_inside += std::abs(at.q(i));
        }
    }
    CHECK(mass_inside > 1.0);

    // Past the right boundary the traveling solution stops being valid.
    CHECK_THROWS_AS(wave1d_exact_solution(cfg, 2.0), ConfigError);
}

TEST_CASE("FOM converges to the traveling pulse at second order in space") {
    const double t_final = 0.2;
    const double dt = 1e-4;
    const Index steps = static_cast<Index>(std::llround(t_final / dt));

    std::vector<double> errors;
    for (Index n : {256, 512, 1024}) {
        Wave1DConfig cfg;
        cfg.n = n;
        cfg.mu = 0.5;
        const HamiltonianFOM fom = build_wave1d(cfg);
        const Trajectory tr = integrate_fom(fom, wave1d_initial_state(cfg), dt, steps);
        const PartitionedState end =
            PartitionedState::from_full(tr.states.col(tr.states.cols() - 1));
        errors.push_back(q_error_l2(end, wave1d_exact_solution(cfg, t_final), cfg.dx()));
    }
    const double order01 = std::log2(errors[0] / errors[1]);
    const double order12 = std::log2(errors[1] / errors[2]);
    CHECK(order01 >= 1.9);
    CHECK(order12 >= 1.9);
    CHECK(order01 <= 2.6);
}

TEST_CASE("1D energy form is nonnegative") {
    Wave1DConfig cfg;
    cfg.n = 64;
    const HamiltonianFOM fom = build_wave1d(cfg);
    std::mt19937_64 gen(51);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector q = random_vector(cfg.n, gen);
        CHECK(q.dot(fom.Hq() * q) >= 0.0);
    }
}

TEST_CASE("2D periodic operator annihilates constants") {
    Wave2DConfig cfg;
    cfg.nx = 12;
    cfg.ny = 12;
    const HamiltonianFOM fom = build_wave2d(cfg);
    const Index n = fom.half_dim();
    REQUIRE(n == 144);
    CHECK(fom.kind() == FomKind::nonlinear_cubic);
    CHECK(fom.cubic_coefficient() == cfg.mu);
    CHECK(fom.quadrature_weight() == doctest::Approx(cfg.dx() * cfg.dy()).epsilon(1e-15));

    // Row sums vanish: periodic stencil has no boundary closure.
    const Vector row_sums = fom.Hq() * Vector::Ones(n);
    const double scale = 1.0 / (cfg.dx() * cfg.dx());
    CHECK(row_sums.lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
}

TEST_CASE("2D operator reproduces the discrete Fourier eigenvalue") {
    Wave2DConfig cfg; // 100 x 100 default
    const HamiltonianFOM fom = build_wave2d(cfg);
    const double dx = cfg.dx();
    for (Index k : {1, 3, 7}) {
        Vector field(fom.half_dim());
        for (Index j = 0; j < cfg.ny; ++j) {
            for (Index i = 0; i < cfg.nx; ++i) {
                field(cfg.flat(i, j)) =
                    std::sin(2.0 * kPi * static_cast<double>(k) * cfg.node_x(i) / 20.0);
            }
        }
        const double lambda =
            std::pow(2.0 * std::sin(kPi * static_cast<double>(k) / static_cast<double>(cfg.nx)) /
                         dx,
                     2);
        const Vector applied = fom.Hq() * field; // Hq = -D, PSD
        CHECK((applied - lambda * field).lpNorm<Eigen::Infinity>() <=
              1e-12 * lambda * field.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("2D energy is bounded below by zero") {
    Wave2DConfig cfg;
    cfg.nx = 10;
    cfg.ny = 10;
    cfg.mu = 0.5;
    const HamiltonianFOM fom = build_wave2d(cfg);
    std::mt19937_64 gen(52);
    for (int trial = 0; trial < 50; ++trial) {
        CHECK(fom.energy(Vector(random_vector(2 * fom.half_dim(), gen, 3.0))) >= 0.0);
    }
}

TEST_CASE("2D rhs commutes with grid translations") {
    Wave2DConfig cfg;
    cfg.nx = 16;
    cfg.ny = 16;
    cfg.mu = 1.3;
    const HamiltonianFOM fom = build_wave2d(cfg);
    const Index n = fom.half_dim();
    std::mt19937_64 gen(53);

    const Vector q = random_vector(n, gen);
    const Vector p = random_vector(n, gen);
    Vector y(2 * n), y_shift(2 * n);
    y << q, p;
    y_shift << shift_x(q, cfg), shift_x(p, cfg);

    const Vector f = fom.rhs(y);
    const Vector f_shift = fom.rhs(y_shift);
    Vector f_expected(2 * n);
    f_expected << shift_x(Vector(f.head(n)), cfg), shift_x(Vector(f.tail(n)), cfg);
    CHECK((f_shift - f_expected).lpNorm<Eigen::Infinity>() <=
          1e-12 * f.lpNorm<Eigen::Infinity>());
}

TEST_CASE("2D initial pulse is a centered radial sech profile") {
    Wave2DConfig cfg; // default 100 x 100, amplitude 2
    const PartitionedState y0 = wave2d_initial_state(cfg);
    REQUIRE(y0.half_dim() == 10000);
    // x = y = 0 is the node (50, 50).
    CHECK(y0.q(cfg.flat(50, 50)) == doctest::Approx(2.0).epsilon(1e-14));
    // At r^2 = 2 (x=1, y=-1 is on grid? x=1 -> i=55, y=1 -> j=55).
    const double r2 = 2.0;
    CHECK(y0.q(cfg.flat(55, 45)) == doctest::Approx(2.0 / std::cosh(r2 / 2.0)).epsilon(1e-12));
    CHECK(y0.p.norm() == 0.0);

    Wave2DConfig scaled = cfg;
    scaled.amplitude = 0.5;
    CHECK(wave2d_initial_state(scaled).q(cfg.flat(50, 50)) ==
          doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("config validation rejects bad grids") {
    Wave1DConfig bad1;
    bad1.n = 1;
    CHECK_THROWS_AS(build_wave1d(bad1), ConfigError);
    Wave2DConfig bad2;
    bad2.nx = 0;
    CHECK_THROWS_AS(build_wave2d(bad2), ConfigError);
}

} // TEST_SUITE
