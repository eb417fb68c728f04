#pragma once

#include <cstddef>
#include <vector>

#include "ccoa/error.hpp"

namespace ccoa {

/// Dense vector of finite 64-bit reals. All kernels work in double precision;
/// on-disk indexes narrow to float32 (see knowledge_store).
using Vec = std::vector<double>;

/// Row-major dense matrix, just large enough for projection weights and
/// pattern banks. Not a general tensor type.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }

    bool empty() const { return rows == 0 || cols == 0; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

/// Throws InvalidDimension on empty input, InvalidValue on NaN/Inf components.
void require_finite_vector(const Vec& v, const char* what);

/// Throws InvalidDimension unless both vectors have the same nonzero size.
void require_same_dim(const Vec& a, const Vec& b, const char* what);

double dot(const Vec& a, const Vec& b);
double dot(const double* a, const double* b, std::size_t n);
double norm2(const Vec& v);

/// v^T * M for row vector v (size M.rows); result has size M.cols.
Vec vec_mat(const Vec& v, const Matrix& m);

/// row (pointer, size M.rows) * M; result has size M.cols.
Vec row_mat(const double* row, std::size_t n, const Matrix& m);

/// M * N. Throws InvalidDimension on inner-size mismatch.
Matrix mat_mat(const Matrix& a, const Matrix& b);

bool all_finite(const Vec& v);
bool all_finite(const Matrix& m);

} // namespace ccoa
