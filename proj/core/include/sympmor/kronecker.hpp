#pragma once

#include "sympmor/types.hpp"

namespace sympmor {

// Quadratic feature map without redundant terms.  For x in R^m the features
// are ordered
//
//   x (x) x = (x1^2, x1 x2, ..., x1 xm, x2^2, x2 x3, ..., xm^2)^T
//
// of length m(m+1)/2; each unordered pair {i, j} appears exactly once.

/// Feature dimension m(m+1)/2.
inline Index kron_dim(Index m) { return m * (m + 1) / 2; }

/// Flat position of the pair (i, j) with i <= j in the feature ordering.
inline Index kron_index(Index i, Index j, Index m) {
    return i * m - i * (i - 1) / 2 + (j - i);
}

/// Evaluate the feature map at one point.
Vector kron_nr(const Vector& x);

/// Evaluate the feature map column-wise: Z is m x k, result is m(m+1)/2 x k.
Matrix kron_nr_columns(const Matrix& Z);

/// Jacobian B(x) of the feature map, size m(m+1)/2 x m.  Row (i, j), column
/// k holds d(x_i x_j)/dx_k = delta_ik x_j + delta_jk x_i.
Matrix kron_nr_jacobian(const Vector& x);

// B(x) is linear in x, so its directional derivatives dB/dx_k are constant
// sparse matrices with at most two entries per row.  The two helpers below
// apply them without materializing anything.

/// y += (dB/dx_k) v with v in R^m, y in R^{m(m+1)/2}.
void kron_db_apply(Index k, const Vector& v, Vector& y);

/// w += (dB/dx_k)^T u with u in R^{m(m+1)/2}, w in R^m.
void kron_db_apply_transpose(Index k, const Vector& u, Vector& w);

/// A B(x) for a matrix A with m(m+1)/2 columns, exploiting that column k of
/// B(x) has only m nonzeros (entry x_j, doubled on the diagonal pair, at row
/// (min(j,k), max(j,k))); costs rows(A) * m^2 instead of rows(A) * m^3.
Matrix times_kron_jacobian(const Matrix& A, const Vector& x);

} // namespace sympmor
