#include "sympmor/types.hpp"

#include <string>

namespace sympmor {

PartitionedState::PartitionedState(Vector q_in, Vector p_in)
    : q(std::move(q_in)), p(std::move(p_in)) {
    if (q.size() != p.size()) {
        throw ConfigError("partitioned state: position block has length " +
                          std::to_string(q.size()) + " but momentum block has length " +
                          std::to_string(p.size()));
    }
}

PartitionedState PartitionedState::from_full(const Vector& y) {
    if (y.size() % 2 != 0) {
        throw ConfigError("partitioned state: flat state length " +
                          std::to_string(y.size()) + " is odd");
    }
    const Index n = y.size() / 2;
    return PartitionedState(y.head(n), y.tail(n));
}

Vector PartitionedState::to_full() const {
    Vector y(2 * q.size());
    y.head(q.size()) = q;
    y.tail(p.size()) = p;
    return y;
}

Vector CanonicalStructure::apply(const Vector& y) const {
    detail::require_size(y, 2 * half_dim, "canonical structure argument");
    Vector out(y.size());
    out.head(half_dim) = y.tail(half_dim);
    out.tail(half_dim) = -y.head(half_dim);
    return out;
}

Vector CanonicalStructure::apply_transpose(const Vector& y) const {
    return -apply(y);
}

namespace detail {

void require_size(const Vector& v, Index expected, const char* what) {
    if (v.size() != expected) {
        throw ConfigError(std::string(what) + ": expected length " +
                          std::to_string(expected) + ", got " + std::to_string(v.size()));
    }
}

void require_shape(const Matrix& m, Index rows, Index cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ConfigError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
    }
}

} // namespace detail

} // namespace sympmor
