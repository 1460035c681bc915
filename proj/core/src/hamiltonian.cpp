#include "sympmor/hamiltonian.hpp"

#include <string>

namespace sympmor {

namespace {

/// Relative symmetry defect ||A - A^T||_F / max(||A||_F, 1).
double symmetry_defect(const SparseMatrix& A) {
    SparseMatrix At = SparseMatrix(A.transpose());
    const double scale = std::max(A.norm(), 1.0);
    return SparseMatrix(A - At).norm() / scale;
}

} // namespace

HamiltonianFOM::HamiltonianFOM(SparseMatrix Hq, SparseMatrix Hp, double quadrature_weight)
    : Hq_(std::move(Hq)), Hp_(std::move(Hp)), weight_(quadrature_weight),
      kind_(FomKind::linear_separable) {
    n_ = Hq_.rows();
    validate();
}

HamiltonianFOM::HamiltonianFOM(SparseMatrix Hq, SparseMatrix Hp, double cubic_coefficient,
                               double quadrature_weight)
    : Hq_(std::move(Hq)), Hp_(std::move(Hp)), cubic_(cubic_coefficient),
      weight_(quadrature_weight), kind_(FomKind::nonlinear_cubic) {
    n_ = Hq_.rows();
    validate();
}

void HamiltonianFOM::validate() const {
    if (n_ == 0) throw ConfigError("hamiltonian: empty position operator");
    if (Hq_.rows() != Hq_.cols()) {
        throw ConfigError("hamiltonian: Hq is " + std::to_string(Hq_.rows()) + "x" +
                          std::to_string(Hq_.cols()) + ", expected square");
    }
    if (Hp_.rows() != n_ || Hp_.cols() != n_) {
        throw ConfigError("hamiltonian: Hp is " + std::to_string(Hp_.rows()) + "x" +
                          std::to_string(Hp_.cols()) + ", expected " + std::to_string(n_) +
                          "x" + std::to_string(n_));
    }
    constexpr double tol = 1e-12;
    if (symmetry_defect(Hq_) > tol) throw ConfigError("hamiltonian: Hq is not symmetric");
    if (symmetry_defect(Hp_) > tol) throw ConfigError("hamiltonian: Hp is not symmetric");
    if (weight_ <= 0.0) throw ConfigError("hamiltonian: quadrature weight must be positive");
    if (cubic_ < 0.0) throw ConfigError("hamiltonian: cubic coefficient must be nonnegative");
}

double HamiltonianFOM::energy(const Vector& y) const {
    detail::require_size(y, 2 * n_, "hamiltonian state");
    const auto q = y.head(n_);
    const auto p = y.tail(n_);
    double h = 0.5 * q.dot(Hq_ * q) + 0.5 * p.dot(Hp_ * p);
    if (kind_ == FomKind::nonlinear_cubic) {
        h += 0.25 * cubic_ * q.array().square().square().sum();
    }
    return weight_ * h;
}

double HamiltonianFOM::energy(const PartitionedState& s) const {
    return energy(s.to_full());
}

Vector HamiltonianFOM::gradient_dyn(const Vector& y) const {
    detail::require_size(y, 2 * n_, "hamiltonian state");
    const auto q = y.head(n_);
    const auto p = y.tail(n_);
    Vector g(2 * n_);
    g.head(n_) = Hq_ * q;
    if (kind_ == FomKind::nonlinear_cubic) {
        g.head(n_) += cubic_ * q.array().cube().matrix();
    }
    g.tail(n_) = Hp_ * p;
    return g;
}

Vector HamiltonianFOM::gradient(const Vector& y) const {
    return weight_ * gradient_dyn(y);
}

Vector HamiltonianFOM::rhs(const Vector& y) const {
    Vector g = gradient_dyn(y);
    Vector f(2 * n_);
    f.head(n_) = g.tail(n_);
    f.tail(n_) = -g.head(n_);
    return f;
}

SparseMatrix HamiltonianFOM::hessian_dyn(const Vector& y) const {
    detail::require_size(y, 2 * n_, "hamiltonian state");
    SparseMatrix H(2 * n_, 2 * n_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(Hq_.nonZeros() + Hp_.nonZeros() + n_));
    for (Index k = 0; k < Hq_.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(Hq_, k); it; ++it) {
            trips.emplace_back(it.row(), it.col(), it.value());
        }
    }
    if (kind_ == FomKind::nonlinear_cubic) {
        const auto q = y.head(n_);
        for (Index i = 0; i < n_; ++i) {
            trips.emplace_back(i, i, 3.0 * cubic_ * q(i) * q(i));
        }
    }
    for (Index k = 0; k < Hp_.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(Hp_, k); it; ++it) {
            trips.emplace_back(n_ + it.row(), n_ + it.col(), it.value());
        }
    }
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
}

} // namespace sympmor
