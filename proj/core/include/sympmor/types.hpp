#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace sympmor {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Configuration or precondition violation: bad dimensions, invalid flags,
/// malformed files.  CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime numerical failure: Newton divergence, rank deficiency, non-finite
/// values.  CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Canonical phase-space state split into position and momentum blocks of
/// equal length.  The flat layout is y = (q^T, p^T)^T.
struct PartitionedState {
    Vector q;
    Vector p;

    PartitionedState() = default;
    PartitionedState(Vector q_in, Vector p_in);

    /// Split a flat state of even length 2n into its blocks.
    static PartitionedState from_full(const Vector& y);

    /// Concatenate back to the flat layout (q^T, p^T)^T.
    Vector to_full() const;

    Index half_dim() const { return q.size(); }
};

/// The canonical Poisson structure J = [[0, I], [-I, 0]] of size 2n,
/// applied matrix-free.
struct CanonicalStructure {
    Index half_dim = 0;

    explicit CanonicalStructure(Index n) : half_dim(n) {}

    /// J y = (p^T, -q^T)^T for y = (q^T, p^T)^T.
    Vector apply(const Vector& y) const;

    /// J^T y = -J y.
    Vector apply_transpose(const Vector& y) const;
};

namespace detail {

/// Throw ConfigError when a vector block has the wrong length.
void require_size(const Vector& v, Index expected, const char* what);

/// Throw ConfigError unless m has the given shape.
void require_shape(const Matrix& m, Index rows, Index cols, const char* what);

} // namespace detail

} // namespace sympmor
