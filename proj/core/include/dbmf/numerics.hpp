#pragma once

#include <cstddef>
#include <vector>

#include "dbmf/errors.hpp"

namespace dbmf {

using Vec = std::vector<double>;

/// Row-major dense matrix of doubles.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

/// Density estimate sampled on a strictly increasing grid.
struct DensityCurve {
    Vec xs;
    Vec ys;
};

// Vector helpers.
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
Vec normalized(const Vec& a);  // throws ZeroVector below 1e-12
Vec matvec(const DenseMatrix& m, const Vec& x);

/// Cholesky factorization A = L·Lᵀ of a symmetric positive definite matrix.
/// Throws NotSPD when a pivot is not strictly positive.
DenseMatrix cholesky(const DenseMatrix& a);

/// Solves A·x = b given the lower-triangular Cholesky factor of A.
Vec spd_solve(const DenseMatrix& chol, const Vec& b);

/// log Σ exp(v_i), shift-stable.
double log_sum_exp(const Vec& v);

Vec softmax(const Vec& logits);

struct ZScoreStats {
    double mean = 0.0;
    double std = 1.0;

    double apply(double x) const { return (x - mean) / std; }
};

/// Mean and population (1/n) standard deviation.
/// Throws DegenerateDistribution when std < 1e-12.
ZScoreStats zscore_fit(const Vec& values);

/// Maps min→0, max→1; throws DegenerateDistribution when all values equal.
Vec minmax_rescale(const Vec& values);

/// Gaussian kernel density estimate evaluated on `grid`.
DensityCurve gaussian_kde(const Vec& samples, double bandwidth, const Vec& grid);

/// Silverman's rule h = 1.06·σ̂·n^(−1/5), floored at 1e-9 for near-constant data.
double silverman_bandwidth(const Vec& samples);

/// 256-point grid spanning [min−3h, max+3h].
Vec kde_default_grid(const Vec& samples, double bandwidth, std::size_t points = 256);

double trapezoid_area(const Vec& xs, const Vec& ys);

}  // namespace dbmf
