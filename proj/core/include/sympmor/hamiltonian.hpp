#pragma once

#include "sympmor/types.hpp"

namespace sympmor {

/// Structural family of the Hamiltonian.
enum class FomKind {
    linear_separable, ///< H = w (1/2 q^T Hq q + 1/2 p^T Hp p)
    nonlinear_cubic,  ///< adds a quartic well  w * sum_i (c3/4) q_i^4
};

/// Full-order canonical Hamiltonian system
///
///   ydot = J grad Hdyn(y),   y = (q^T, p^T)^T,
///
/// where Hdyn(y) = 1/2 q^T Hq q + 1/2 p^T Hp p (+ sum_i (c3/4) q_i^4) drives
/// the dynamics and the reported energy is H(y) = w * Hdyn(y) with w the
/// quadrature weight of the underlying spatial discretization (w = dx in 1D,
/// dx*dy in 2D, 1 for abstract systems).  The weight scales the conserved
/// quantity to approximate the continuous energy functional; it does not
/// change the flow.
class HamiltonianFOM {
public:
    /// Quadratic Hamiltonian.  Both operators must be symmetric.
    HamiltonianFOM(SparseMatrix Hq, SparseMatrix Hp, double quadrature_weight = 1.0);

    /// Quadratic plus quartic well with coefficient c3 >= 0.
    HamiltonianFOM(SparseMatrix Hq, SparseMatrix Hp, double cubic_coefficient,
                   double quadrature_weight);

    Index half_dim() const { return n_; }
    FomKind kind() const { return kind_; }
    const SparseMatrix& Hq() const { return Hq_; }
    const SparseMatrix& Hp() const { return Hp_; }
    double cubic_coefficient() const { return cubic_; }
    double quadrature_weight() const { return weight_; }

    /// Weighted Hamiltonian H(y) = w * Hdyn(y).
    double energy(const Vector& y) const;
    double energy(const PartitionedState& s) const;

    /// Gradient of the weighted Hamiltonian, grad H(y) = w * grad Hdyn(y).
    Vector gradient(const Vector& y) const;

    /// Unweighted gradient grad Hdyn(y); the vector field is J applied to it.
    Vector gradient_dyn(const Vector& y) const;

    /// Vector field ydot = J grad Hdyn(y) = (Hp p, -Hq q - c3 q.^3).
    Vector rhs(const Vector& y) const;

    /// Hessian of Hdyn at y: blkdiag(Hq + 3 c3 diag(q.^2), Hp).
    /// Constant for linear_separable systems.
    SparseMatrix hessian_dyn(const Vector& y) const;

private:
    void validate() const;

    SparseMatrix Hq_;
    SparseMatrix Hp_;
    double cubic_ = 0.0;
    double weight_ = 1.0;
    Index n_ = 0;
    FomKind kind_ = FomKind::linear_separable;
};

} // namespace sympmor
