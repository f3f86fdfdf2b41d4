#include "dbmf/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace dbmf {

namespace {
constexpr double kSqrt2Pi = 2.50662827463100050242;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec normalized(const Vec& a) {
    const double n = norm2(a);
    if (n < 1e-12) throw ZeroVector("normalized: norm below 1e-12");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / n;
    return out;
}

Vec matvec(const DenseMatrix& m, const Vec& x) {
    if (x.size() != m.cols) throw DimensionMismatch("matvec: size mismatch");
    Vec out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) s += m(r, c) * x[c];
        out[r] = s;
    }
    return out;
}

DenseMatrix cholesky(const DenseMatrix& a) {
    if (a.rows != a.cols) throw DimensionMismatch("cholesky: matrix not square");
    const std::size_t n = a.rows;
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= 0.0) throw NotSPD("cholesky: nonpositive pivot at column " + std::to_string(j));
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Vec spd_solve(const DenseMatrix& chol, const Vec& b) {
    const std::size_t n = chol.rows;
    if (b.size() != n) throw DimensionMismatch("spd_solve: rhs length mismatch");
    // Forward substitution L·y = b.
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * y[k];
        y[i] = s / chol(i, i);
    }
    // Back substitution Lᵀ·x = y.
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= chol(k, ii) * x[k];
        x[ii] = s / chol(ii, ii);
    }
    return x;
}

double log_sum_exp(const Vec& v) {
    if (v.empty()) throw EmptyInput("log_sum_exp: empty input");
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

Vec softmax(const Vec& logits) {
    const double lse = log_sum_exp(logits);
    Vec p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
    return p;
}

ZScoreStats zscore_fit(const Vec& values) {
    if (values.size() < 2) throw EmptyInput("zscore_fit: need at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    const double std = std::sqrt(var);
    if (std < 1e-12) throw DegenerateDistribution("zscore_fit: constant values");
    return {mean, std};
}

Vec minmax_rescale(const Vec& values) {
    if (values.size() < 2) throw EmptyInput("minmax_rescale: need at least 2 values");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (*mx - *mn < 1e-300) throw DegenerateDistribution("minmax_rescale: all values equal");
    Vec out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *mn) / (*mx - *mn);
    return out;
}

DensityCurve gaussian_kde(const Vec& samples, double bandwidth, const Vec& grid) {
    if (samples.empty()) throw EmptyInput("gaussian_kde: no samples");
    if (!(bandwidth > 0.0)) throw InvalidBandwidth("gaussian_kde: bandwidth must be positive");
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (!(grid[g] > grid[g - 1])) throw Error("gaussian_kde: grid not strictly increasing");
    }
    DensityCurve curve;
    curve.xs = grid;
    curve.ys.resize(grid.size());
    const double scale = 1.0 / (static_cast<double>(samples.size()) * bandwidth * kSqrt2Pi);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (double x : samples) {
            const double z = (grid[g] - x) / bandwidth;
            s += std::exp(-0.5 * z * z);
        }
        curve.ys[g] = scale * s;
    }
    return curve;
}

double silverman_bandwidth(const Vec& samples) {
    if (samples.empty()) throw EmptyInput("silverman_bandwidth: no samples");
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples.size());
    const double h =
        1.06 * std::sqrt(var) * std::pow(static_cast<double>(samples.size()), -0.2);
    return std::max(h, 1e-9);
}

Vec kde_default_grid(const Vec& samples, double bandwidth, std::size_t points) {
    if (samples.empty()) throw EmptyInput("kde_default_grid: no samples");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *mn - 3.0 * bandwidth;
    const double hi = *mx + 3.0 * bandwidth;
    Vec grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

double trapezoid_area(const Vec& xs, const Vec& ys) {
    if (xs.size() != ys.size()) throw DimensionMismatch("trapezoid_area: size mismatch");
    double a = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        a += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    }
    return a;
}

}  // namespace dbmf
