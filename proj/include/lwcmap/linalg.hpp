#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lwcmap/errors.hpp"

namespace lwcmap {

// Row-major dense matrix of doubles. Small and boring on purpose; every
// model in this library is tiny by linear-algebra standards.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }
    double* row_ptr(std::size_t i) { return data.data() + i * cols; }

    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(idx[i], j);
        return out;
    }

    Matrix select_cols(const std::vector<std::size_t>& idx) const {
        Matrix out(rows, idx.size());
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = (*this)(i, idx[j]);
        return out;
    }
};

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. A is overwritten
// with the diagonalized matrix; V receives the eigenvectors as columns.
inline void jacobi_eigen_symmetric(Matrix& a, Matrix& v) {
    const std::size_t n = a.rows;
    v = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
}

} // namespace detail

// Minimum-norm least-squares solution of A x = b via the pseudo-inverse of
// the Gram matrix. Rank deficiency (e.g. a constant column next to the
// intercept) falls back to the minimum-norm solution instead of blowing up.
inline std::vector<double> min_norm_lstsq(const Matrix& a, const std::vector<double>& b) {
    if (a.rows != b.size()) fail("DimensionMismatch", "matrix rows != rhs length");
    const std::size_t n = a.rows, p = a.cols;

    Matrix gram(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += a(k, i) * a(k, j);
            gram(i, j) = gram(j, i) = s;
        }
    std::vector<double> atb(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += a(k, i) * b[k];
        atb[i] = s;
    }

    Matrix d = gram, v;
    detail::jacobi_eigen_symmetric(d, v);

    double max_eig = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_eig = std::max(max_eig, std::fabs(d(i, i)));
    const double cutoff = max_eig * 1e-12;

    // x = V diag(1/lambda) V^T A^T b, dropping near-zero eigenvalues
    std::vector<double> tmp(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        double lambda = d(i, i);
        if (std::fabs(lambda) <= cutoff) continue;
        double dot = 0.0;
        for (std::size_t k = 0; k < p; ++k) dot += v(k, i) * atb[k];
        tmp[i] = dot / lambda;
    }
    std::vector<double> x(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i) s += v(k, i) * tmp[i];
        x[k] = s;
    }
    return x;
}

} // namespace lwcmap
