#pragma once

#include "sympmor/hamiltonian.hpp"

namespace sympmor {

// ---------------------------------------------------------------------------
// 1D linear wave equation on (-1/2, 1/2) with homogeneous Dirichlet boundary
// conditions, semi-discretized by second-order central differences on n
// interior points:
//
//   qdot = p,   pdot = mu^2 D q,
//
// i.e. Hq = -mu^2 D (positive semidefinite), Hp = I, quadrature weight dx.
// The transport speed mu also parametrizes the initial pulse.
// ---------------------------------------------------------------------------

struct Wave1DConfig {
    Index n = 2048;    ///< number of interior grid points
    double mu = 0.5;   ///< transport speed and pulse width parameter
    double x_min = -0.5;
    double x_max = 0.5;

    double dx() const { return (x_max - x_min) / static_cast<double>(n + 1); }
    /// Interior grid node x_i = x_min + (i+1) dx, 0-based.
    double node(Index i) const { return x_min + static_cast<double>(i + 1) * dx(); }
    void validate() const;
};

/// Cubic-spline bump h(s): 1 - 3/2 s^2 + 3/4 s^3 on [0,1], 1/4 (2-s)^3 on
/// [1,2], 0 beyond.  C^2, supported on s in [0,2].
double spline_bump(double s);

/// Derivative h'(s) of the bump.
double spline_bump_derivative(double s);

/// Assemble the 1D wave FOM.
HamiltonianFOM build_wave1d(const Wave1DConfig& cfg);

/// Traveling-pulse initial state: q0(x) = h(s(x)), s(x) = 4|x + 1/2 - mu/2|/mu,
/// with p0 = -mu dq0/dx so the pulse moves right at speed mu.
PartitionedState wave1d_initial_state(const Wave1DConfig& cfg);

/// Exact solution at time t: the initial pulse translated by mu t.  Refuses
/// (ConfigError) times at which the pulse support has passed the right
/// boundary, where the Dirichlet problem stops matching free transport.
PartitionedState wave1d_exact_solution(const Wave1DConfig& cfg, double t);

// ---------------------------------------------------------------------------
// 2D nonlinear wave equation on the periodic square (-10, 10)^2, 100x100
// default grid:
//
//   qdot = p,   pdot = D q - mu q.^3,
//
// i.e. Hq = -D (five-point periodic Laplacian, PSD), Hp = I, cubic
// coefficient mu, quadrature weight dx*dy.
// ---------------------------------------------------------------------------

struct Wave2DConfig {
    Index nx = 100;
    Index ny = 100;
    double mu = 1.0;   ///< coefficient of the cubic nonlinearity
    double x_min = -10.0;
    double x_max = 10.0;
    double amplitude = 2.0; ///< initial pulse height

    double dx() const { return (x_max - x_min) / static_cast<double>(nx); }
    double dy() const { return (x_max - x_min) / static_cast<double>(ny); }
    /// Grid node along one axis, 0-based: x_i = x_min + i dx.
    double node_x(Index i) const { return x_min + static_cast<double>(i) * dx(); }
    double node_y(Index j) const { return x_min + static_cast<double>(j) * dy(); }
    /// Flat index of grid point (i, j), x fastest.
    Index flat(Index i, Index j) const { return j * nx + i; }
    void validate() const;
};

/// Assemble the 2D nonlinear wave FOM.
HamiltonianFOM build_wave2d(const Wave2DConfig& cfg);

/// Radial pulse q0 = amplitude * sech(r^2 / 2), p0 = 0, centered at origin.
PartitionedState wave2d_initial_state(const Wave2DConfig& cfg);

} // namespace sympmor
