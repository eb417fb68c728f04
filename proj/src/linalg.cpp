#include "ccoa/linalg.hpp"

#include <cmath>

namespace ccoa {

void require_finite_vector(const Vec& v, const char* what) {
    if (v.empty()) {
        throw Error(ErrorCode::InvalidDimension, std::string(what) + ": empty vector");
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::InvalidValue, std::string(what) + ": non-finite component");
        }
    }
}

void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.empty() || b.empty() || a.size() != b.size()) {
        throw Error(ErrorCode::InvalidDimension,
                    std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
    }
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& v) {
    return std::sqrt(dot(v, v));
}

Vec vec_mat(const Vec& v, const Matrix& m) {
    return row_mat(v.data(), v.size(), m);
}

Vec row_mat(const double* row, std::size_t n, const Matrix& m) {
    if (n != m.rows) {
        throw Error(ErrorCode::InvalidDimension,
                    "vector-matrix product: " + std::to_string(n) + " vs " +
                        std::to_string(m.rows) + " rows");
    }
    Vec out(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double x = row[r];
        if (x == 0.0) continue;
        const double* mr = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += x * mr[c];
    }
    return out;
}

Matrix mat_mat(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw Error(ErrorCode::InvalidDimension,
                    "matrix product: " + std::to_string(a.cols) + " vs " +
                        std::to_string(b.rows));
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double x = a.at(i, k);
            if (x == 0.0) continue;
            const double* br = b.row(k);
            double* outr = out.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) outr[j] += x * br[j];
        }
    }
    return out;
}

bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const Matrix& m) {
    for (double x : m.data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

} // namespace ccoa
