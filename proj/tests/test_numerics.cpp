#include <doctest.h>

#include <cmath>

#include "dbmf/numerics.hpp"
#include "dbmf/rng.hpp"
#include "test_util.hpp"

using namespace dbmf;

TEST_CASE("cholesky identity and diagonal") {
    const DenseMatrix id3 = DenseMatrix::identity(3);
    const DenseMatrix l = cholesky(id3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(l(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
        }
    }
    DenseMatrix d(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const DenseMatrix ld = cholesky(d);
    CHECK(ld(0, 0) == doctest::Approx(2.0));
    CHECK(ld(1, 1) == doctest::Approx(3.0));
    CHECK(ld(0, 1) == 0.0);
    CHECK(ld(1, 0) == 0.0);
}

TEST_CASE("cholesky reconstructs seeded SPD matrices up to 32x32") {
    Rng rng(42);
    for (std::size_t n : {2u, 5u, 13u, 32u}) {
        const DenseMatrix a = testutil::random_spd(rng, n);
        const DenseMatrix l = cholesky(a);
        DenseMatrix recon(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += l(i, k) * l(j, k);
                recon(i, j) = a(i, j) - s;
            }
        }
        CHECK(testutil::frobenius(recon) / testutil::frobenius(a) < 1e-8);
    }
}

TEST_CASE("cholesky rejects non-SPD input") {
    DenseMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 2.0;
    m(1, 1) = 1.0;  // eigenvalues 3, -1
    CHECK_THROWS_AS(cholesky(m), NotSPD);
}

TEST_CASE("spd_solve trivial systems") {
    const DenseMatrix id2 = DenseMatrix::identity(2);
    const Vec x = spd_solve(id2, {3.0, 4.0});
    CHECK(x[0] == doctest::Approx(3.0));
    CHECK(x[1] == doctest::Approx(4.0));

    DenseMatrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;  // chol of diag(4, 9)
    const Vec y = spd_solve(d, {4.0, 9.0});
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(spd_solve(id2, {1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("spd_solve residual on seeded systems") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rng.index(20);
        const DenseMatrix a = testutil::random_spd(rng, n);
        const Vec b = rng.normal_vec(n);
        const Vec x = spd_solve(cholesky(a), b);
        const Vec ax = matvec(a, x);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res += (ax[i] - b[i]) * (ax[i] - b[i]);
        CHECK(std::sqrt(res) / norm2(b) < 1e-8);
    }
}

TEST_CASE("log_sum_exp") {
    CHECK(log_sum_exp({0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(log_sum_exp({1000.0, 1000.0}) ==
          doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));
    CHECK(log_sum_exp({3.5}) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK_THROWS_AS(log_sum_exp({}), EmptyInput);

    Rng rng(11);
    const Vec v = rng.normal_vec(10, 0.0, 3.0);
    CHECK(std::fabs(log_sum_exp(v) - testutil::lse_long_double(v)) < 1e-12);
}

TEST_CASE("log_sum_exp shift invariance") {
    Rng rng(12);
    const Vec v = rng.normal_vec(8);
    for (double c : {1000.0, -1000.0}) {
        Vec shifted = v;
        for (double& x : shifted) x += c;
        CHECK(log_sum_exp(shifted) == doctest::Approx(log_sum_exp(v) + c).epsilon(1e-12));
    }
}

TEST_CASE("zscore_fit") {
    const auto stats = zscore_fit({1.0, 3.0});
    CHECK(stats.mean == doctest::Approx(2.0));
    CHECK(stats.std == doctest::Approx(1.0));
    CHECK_THROWS_AS(zscore_fit({5.0, 5.0, 5.0}), DegenerateDistribution);

    Rng rng(13);
    const Vec draws = rng.normal_vec(100, 4.0, 2.5);
    const auto s = zscore_fit(draws);
    double mean = 0.0;
    double var = 0.0;
    for (double v : draws) mean += s.apply(v);
    mean /= 100.0;
    for (double v : draws) var += (s.apply(v) - mean) * (s.apply(v) - mean);
    var /= 100.0;
    CHECK(std::fabs(mean) < 1e-10);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-10);
}

TEST_CASE("minmax_rescale") {
    const Vec out = minmax_rescale({2.0, 4.0, 6.0});
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == 1.0);
    const Vec pair = minmax_rescale({-1.0, 1.0});
    CHECK(pair[0] == 0.0);
    CHECK(pair[1] == 1.0);
    CHECK_THROWS_AS(minmax_rescale({3.0, 3.0}), DegenerateDistribution);
}

TEST_CASE("minmax_rescale and zscore preserve every pairwise ranking") {
    Rng rng(14);
    const Vec v = rng.normal_vec(40);
    const Vec mm = minmax_rescale(v);
    const auto zs = zscore_fit(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            CHECK((v[i] < v[j]) == (mm[i] < mm[j]));
            CHECK((v[i] < v[j]) == (zs.apply(v[i]) < zs.apply(v[j])));
        }
    }
}

TEST_CASE("gaussian_kde point values") {
    const auto single = gaussian_kde({0.0}, 1.0, {0.0, 1.0});
    CHECK(single.ys[0] == doctest::Approx(0.398942).epsilon(1e-6));
    CHECK(single.ys[1] == doctest::Approx(0.241971).epsilon(1e-6));
    // Average of two unit kernels at -1 and 1, evaluated at 0.
    const auto pair = gaussian_kde({-1.0, 1.0}, 1.0, {0.0});
    CHECK(pair.ys[0] == doctest::Approx(0.241971).epsilon(1e-6));
    CHECK_THROWS_AS(gaussian_kde({0.0}, 0.0, {0.0}), InvalidBandwidth);
}

TEST_CASE("gaussian_kde density nonnegative and normalized") {
    Rng rng(15);
    const Vec samples = rng.normal_vec(60, 1.0, 2.0);
    const double h = silverman_bandwidth(samples);

    // Grid spanning data +-6h: integral within 2% of 1.
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    Vec grid(512);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = (*mn - 6.0 * h) +
                  (*mx - *mn + 12.0 * h) * static_cast<double>(i) / (grid.size() - 1.0);
    }
    const auto curve = gaussian_kde(samples, h, grid);
    for (double y : curve.ys) CHECK(y >= 0.0);
    CHECK(trapezoid_area(curve.xs, curve.ys) == doctest::Approx(1.0).epsilon(0.02));

    // Grid spanning data +-4h: integral within 5% of 1 (curve invariant).
    Vec grid4(256);
    for (std::size_t i = 0; i < grid4.size(); ++i) {
        grid4[i] = (*mn - 4.0 * h) +
                   (*mx - *mn + 8.0 * h) * static_cast<double>(i) / (grid4.size() - 1.0);
    }
    const auto curve4 = gaussian_kde(samples, h, grid4);
    CHECK(trapezoid_area(curve4.xs, curve4.ys) == doctest::Approx(1.0).epsilon(0.05));
}
