#pragma once

#include "sympmor/types.hpp"

#include <string>

namespace sympmor {

// Minimal binary matrix container, bit-exact across save/load:
//
//   bytes 0..3   magic "MRX1"
//   bytes 4..7   u32 little-endian version (= 1)
//   bytes 8..15  u64 little-endian rows
//   bytes 16..23 u64 little-endian cols
//   then rows*cols f64 little-endian values, column-major.

/// Write a dense matrix. Throws ConfigError on I/O failure.
void save_matrix(const std::string& path, const Matrix& m);

/// Read a dense matrix. Throws ConfigError on bad magic, version, or a
/// truncated payload.
Matrix load_matrix(const std::string& path);

/// Convenience wrappers for column vectors stored as n x 1 matrices.
void save_vector(const std::string& path, const Vector& v);
Vector load_vector(const std::string& path);

} // namespace sympmor
