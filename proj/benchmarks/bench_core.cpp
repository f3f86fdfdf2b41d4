#include <benchmark/benchmark.h>

#include "dbmf/metrics.hpp"
#include "dbmf/numerics.hpp"
#include "dbmf/rng.hpp"
#include "dbmf/text_image.hpp"
#include "dbmf/vision.hpp"

using namespace dbmf;

namespace {

DenseMatrix make_spd(Rng& rng, std::size_t n) {
    DenseMatrix b(n, n);
    for (double& v : b.data) v = rng.normal();
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b(k, i) * b(k, j);
            a(i, j) = s + (i == j ? 1.0 : 0.0);
        }
    }
    return a;
}

void BM_Cholesky(benchmark::State& state) {
    Rng rng(1);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const DenseMatrix a = make_spd(rng, n);
    for (auto _ : state) benchmark::DoNotOptimize(cholesky(a));
}
BENCHMARK(BM_Cholesky)->Arg(16)->Arg(32)->Arg(64);

void BM_ScoreSv(benchmark::State& state) {
    Rng rng(2);
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    std::vector<std::pair<Vec, std::size_t>> feats;
    for (std::size_t i = 0; i < 20 * 3; ++i) feats.emplace_back(rng.normal_vec(d), i % 3);
    const GaussianStats stats = fit_gaussian_stats(feats, 3);
    const Vec x = rng.normal_vec(d);
    for (auto _ : state) benchmark::DoNotOptimize(score_sv(stats, x));
}
BENCHMARK(BM_ScoreSv)->Arg(16)->Arg(64);

void BM_ScoreSt(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const TextImageBranch branch = make_text_image_branch(d, d, {"a", "b", "c"}, 4);
    const Vec x = rng.normal_vec(d);
    for (auto _ : state) benchmark::DoNotOptimize(score_st(branch, x));
}
BENCHMARK(BM_ScoreSt)->Arg(16)->Arg(64);

void BM_Auroc(benchmark::State& state) {
    Rng rng(5);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<ScoredSample> samples;
    for (std::size_t i = 0; i < n; ++i) {
        samples.push_back({"s", (i % 2 ? 1.0 : 0.0) + rng.normal(), i % 2 == 1});
    }
    for (auto _ : state) benchmark::DoNotOptimize(auroc(samples));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(10000);

void BM_GaussianKde(benchmark::State& state) {
    Rng rng(6);
    const Vec samples = rng.normal_vec(static_cast<std::size_t>(state.range(0)));
    const double h = silverman_bandwidth(samples);
    const Vec grid = kde_default_grid(samples, h, 256);
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_kde(samples, h, grid));
}
BENCHMARK(BM_GaussianKde)->Arg(200)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
