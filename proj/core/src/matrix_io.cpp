#include "sympmor/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>

static_assert(std::endian::native == std::endian::little,
              "matrix container assumes a little-endian host");

namespace sympmor {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw ConfigError("matrix file '" + path + "': " + why);
}

} // namespace

void save_matrix(const std::string& path, const Matrix& m) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(path, "cannot open for writing");

    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    bool ok = std::fwrite(kMagic, 1, 4, f.get()) == 4 &&
              std::fwrite(&kVersion, sizeof kVersion, 1, f.get()) == 1 &&
              std::fwrite(&rows, sizeof rows, 1, f.get()) == 1 &&
              std::fwrite(&cols, sizeof cols, 1, f.get()) == 1;
    const std::size_t count = static_cast<std::size_t>(m.size());
    // Eigen's default storage is column-major, so the buffer is written as-is.
    if (ok && count > 0) {
        ok = std::fwrite(m.data(), sizeof(double), count, f.get()) == count;
    }
    if (!ok) fail(path, "write failed");
}

Matrix load_matrix(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(path, "cannot open for reading");

    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    if (std::fread(magic, 1, 4, f.get()) != 4) fail(path, "truncated header");
    if (std::memcmp(magic, kMagic, 4) != 0) fail(path, "bad magic");
    if (std::fread(&version, sizeof version, 1, f.get()) != 1) fail(path, "truncated header");
    if (version != kVersion) {
        fail(path, "unsupported version " + std::to_string(version));
    }
    if (std::fread(&rows, sizeof rows, 1, f.get()) != 1 ||
        std::fread(&cols, sizeof cols, 1, f.get()) != 1) {
        fail(path, "truncated header");
    }

    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    const std::size_t count = static_cast<std::size_t>(m.size());
    if (count > 0 && std::fread(m.data(), sizeof(double), count, f.get()) != count) {
        fail(path, "truncated payload");
    }
    return m;
}

void save_vector(const std::string& path, const Vector& v) {
    save_matrix(path, Matrix(v));
}

Vector load_vector(const std::string& path) {
    Matrix m = load_matrix(path);
    if (m.cols() != 1) {
        fail(path, "expected a single column, got " + std::to_string(m.cols()));
    }
    return Vector(m.col(0));
}

} // namespace sympmor
