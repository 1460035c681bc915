#include "sympmor/wave.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace sympmor {

void Wave1DConfig::validate() const {
    if (n < 2) throw ConfigError("wave1d: need at least 2 interior points");
    if (mu <= 0.0) throw ConfigError("wave1d: mu must be positive");
    if (x_max <= x_min) throw ConfigError("wave1d: empty domain");
}

double spline_bump(double s) {
    s = std::abs(s);
    if (s <= 1.0) return 1.0 - 1.5 * s * s + 0.75 * s * s * s;
    if (s <= 2.0) {
        const double t = 2.0 - s;
        return 0.25 * t * t * t;
    }
    return 0.0;
}

double spline_bump_derivative(double s) {
    s = std::abs(s);
    if (s <= 1.0) return -3.0 * s + 2.25 * s * s;
    if (s <= 2.0) {
        const double t = 2.0 - s;
        return -0.75 * t * t;
    }
    return 0.0;
}

namespace {

/// Dirichlet second-difference operator scaled by -mu^2/dx^2; returned as
/// Hq = -mu^2 D, which is symmetric positive definite.
SparseMatrix dirichlet_hq(const Wave1DConfig& cfg) {
    const double h2 = cfg.dx() * cfg.dx();
    const double diag = 2.0 * cfg.mu * cfg.mu / h2;
    const double off = -cfg.mu * cfg.mu / h2;
    SparseMatrix Hq(cfg.n, cfg.n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(3 * cfg.n));
    for (Index i = 0; i < cfg.n; ++i) {
        trips.emplace_back(i, i, diag);
        if (i + 1 < cfg.n) {
            trips.emplace_back(i, i + 1, off);
            trips.emplace_back(i + 1, i, off);
        }
    }
    Hq.setFromTriplets(trips.begin(), trips.end());
    return Hq;
}

SparseMatrix identity_sparse(Index n) {
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

/// Pulse profile in traveling coordinates: s(x) measures the scaled distance
/// from the pulse center x_min + mu/2, so the support is [x_min, x_min + mu].
double pulse_scale(const Wave1DConfig& cfg, double x) {
    return 4.0 * std::abs(x - (cfg.x_min + 0.5 * cfg.mu)) / cfg.mu;
}

} // namespace

HamiltonianFOM build_wave1d(const Wave1DConfig& cfg) {
    cfg.validate();
    return HamiltonianFOM(dirichlet_hq(cfg), identity_sparse(cfg.n), cfg.dx());
}

PartitionedState wave1d_initial_state(const Wave1DConfig& cfg) {
    cfg.validate();
    Vector q(cfg.n);
    Vector p(cfg.n);
    const double center = cfg.x_min + 0.5 * cfg.mu;
    for (Index i = 0; i < cfg.n; ++i) {
        const double x = cfg.node(i);
        const double s = pulse_scale(cfg, x);
        q(i) = spline_bump(s);
        // p0 = -mu dq0/dx; chain rule through s(x) gives ds/dx = +-4/mu.
        const double ds_dx = (x >= center ? 4.0 : -4.0) / cfg.mu;
        p(i) = -cfg.mu * spline_bump_derivative(s) * ds_dx;
    }
    return PartitionedState(std::move(q), std::move(p));
}

PartitionedState wave1d_exact_solution(const Wave1DConfig& cfg, double t) {
    cfg.validate();
    if (t < 0.0) throw ConfigError("wave1d exact solution: negative time");
    // The pulse supported on [x_min, x_min + mu] travels right at speed mu;
    // the free-transport solution is only valid until it meets the boundary.
    const double support_right = cfg.x_min + cfg.mu + cfg.mu * t;
    if (support_right > cfg.x_max + 1e-12) {
        throw ConfigError("wave1d exact solution: at t = " + std::to_string(t) +
                          " the pulse support has reached the right boundary (valid for t <= " +
                          std::to_string((cfg.x_max - cfg.x_min - cfg.mu) / cfg.mu) + ")");
    }
    const double center = cfg.x_min + 0.5 * cfg.mu + cfg.mu * t;
    Vector q(cfg.n);
    Vector p(cfg.n);
    for (Index i = 0; i < cfg.n; ++i) {
        const double x = cfg.node(i);
        const double s = 4.0 * std::abs(x - center) / cfg.mu;
        q(i) = spline_bump(s);
        const double ds_dx = (x >= center ? 4.0 : -4.0) / cfg.mu;
        p(i) = -cfg.mu * spline_bump_derivative(s) * ds_dx;
    }
    return PartitionedState(std::move(q), std::move(p));
}

void Wave2DConfig::validate() const {
    if (nx < 3 || ny < 3) throw ConfigError("wave2d: need at least a 3x3 grid");
    if (mu < 0.0) throw ConfigError("wave2d: mu must be nonnegative");
    if (x_max <= x_min) throw ConfigError("wave2d: empty domain");
}

HamiltonianFOM build_wave2d(const Wave2DConfig& cfg) {
    cfg.validate();
    const Index n = cfg.nx * cfg.ny;
    const double cx = 1.0 / (cfg.dx() * cfg.dx());
    const double cy = 1.0 / (cfg.dy() * cfg.dy());
    // Hq = -D for the periodic five-point Laplacian D.
    SparseMatrix Hq(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(5 * n));
    for (Index j = 0; j < cfg.ny; ++j) {
        for (Index i = 0; i < cfg.nx; ++i) {
            const Index row = cfg.flat(i, j);
            trips.emplace_back(row, row, 2.0 * cx + 2.0 * cy);
            const Index left = cfg.flat((i + cfg.nx - 1) % cfg.nx, j);
            const Index right = cfg.flat((i + 1) % cfg.nx, j);
            const Index down = cfg.flat(i, (j + cfg.ny - 1) % cfg.ny);
            const Index up = cfg.flat(i, (j + 1) % cfg.ny);
            trips.emplace_back(row, left, -cx);
            trips.emplace_back(row, right, -cx);
            trips.emplace_back(row, down, -cy);
            trips.emplace_back(row, up, -cy);
        }
    }
    Hq.setFromTriplets(trips.begin(), trips.end());

    SparseMatrix Hp(n, n);
    Hp.setIdentity();
    return HamiltonianFOM(std::move(Hq), std::move(Hp), cfg.mu, cfg.dx() * cfg.dy());
}

PartitionedState wave2d_initial_state(const Wave2DConfig& cfg) {
    cfg.validate();
    const Index n = cfg.nx * cfg.ny;
    Vector q(n);
    for (Index j = 0; j < cfg.ny; ++j) {
        for (Index i = 0; i < cfg.nx; ++i) {
            const double x = cfg.node_x(i);
            const double y = cfg.node_y(j);
            const double r2 = x * x + y * y;
            q(cfg.flat(i, j)) = cfg.amplitude / std::cosh(0.5 * r2);
        }
    }
    return PartitionedState(std::move(q), Vector::Zero(n));
}

} // namespace sympmor
