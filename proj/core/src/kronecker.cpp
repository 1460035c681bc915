#include "sympmor/kronecker.hpp"

#include <string>

namespace sympmor {

Vector kron_nr(const Vector& x) {
    const Index m = x.size();
    Vector out(kron_dim(m));
    Index row = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = i; j < m; ++j) {
            out(row++) = x(i) * x(j);
        }
    }
    return out;
}

Matrix kron_nr_columns(const Matrix& Z) {
    const Index m = Z.rows();
    Matrix out(kron_dim(m), Z.cols());
    for (Index c = 0; c < Z.cols(); ++c) {
        Index row = 0;
        for (Index i = 0; i < m; ++i) {
            const double zi = Z(i, c);
            for (Index j = i; j < m; ++j) {
                out(row++, c) = zi * Z(j, c);
            }
        }
    }
    return out;
}

Matrix kron_nr_jacobian(const Vector& x) {
    const Index m = x.size();
    Matrix B = Matrix::Zero(kron_dim(m), m);
    Index row = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = i; j < m; ++j) {
            // d(x_i x_j)/dx_k has the two entries below (one doubled entry
            // when i == j == k).
            B(row, i) += x(j);
            B(row, j) += x(i);
            ++row;
        }
    }
    return B;
}

void kron_db_apply(Index k, const Vector& v, Vector& y) {
    const Index m = v.size();
    // Rows (k, j) for j >= k pick up v_j; rows (i, k) for i <= k pick up v_i;
    // the diagonal row (k, k) receives both and ends up with 2 v_k.
    for (Index j = k; j < m; ++j) {
        y(kron_index(k, j, m)) += v(j);
    }
    for (Index i = 0; i <= k; ++i) {
        y(kron_index(i, k, m)) += v(i);
    }
}

void kron_db_apply_transpose(Index k, const Vector& u, Vector& w) {
    const Index m = w.size();
    // Column l of dB/dx_k has a single entry at row (min(k,l), max(k,l)),
    // doubled when l == k.
    for (Index l = 0; l < m; ++l) {
        const Index row = (l < k) ? kron_index(l, k, m) : kron_index(k, l, m);
        w(l) += (l == k ? 2.0 : 1.0) * u(row);
    }
}

Matrix times_kron_jacobian(const Matrix& A, const Vector& x) {
    const Index m = x.size();
    if (A.cols() != kron_dim(m)) {
        throw ConfigError("kron product: matrix has " + std::to_string(A.cols()) +
                          " columns, expected " + std::to_string(kron_dim(m)));
    }
    Matrix AB = Matrix::Zero(A.rows(), m);
    for (Index k = 0; k < m; ++k) {
        for (Index j = 0; j < m; ++j) {
            const Index col = (j < k) ? kron_index(j, k, m) : kron_index(k, j, m);
            const double val = (j == k) ? 2.0 * x(j) : x(j);
            AB.col(k).noalias() += val * A.col(col);
        }
    }
    return AB;
}

} // namespace sympmor
