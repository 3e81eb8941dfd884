#include <benchmark/benchmark.h>

#include <random>

#include "basisgen/benchmark.hpp"
#include "basisgen/gmm.hpp"
#include "basisgen/kde.hpp"
#include "basisgen/linear_basis.hpp"
#include "basisgen/wavelet.hpp"

using namespace basisgen;

namespace {

RowMatrix normal_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    RowMatrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = g(rng);
    }
    return x;
}

void BM_Dwt2(benchmark::State& state) {
    const auto n = state.range(0);
    const Matrix img = normal_rows(n, n, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dwt2(img));
    }
}
BENCHMARK(BM_Dwt2)->Arg(28)->Arg(32)->Arg(128);

void BM_DwtFeatures(benchmark::State& state) {
    const DatasetTensor data = synth_garments({static_cast<std::size_t>(state.range(0)), 1});
    for (auto _ : state) {
        benchmark::DoNotOptimize(dwt_features(data));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DwtFeatures)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GmmLogpdf(benchmark::State& state) {
    const auto d = state.range(0);
    EmOptions opts;
    opts.k = 10;
    opts.covariance_type = state.range(1) ? CovarianceType::Full : CovarianceType::Diagonal;
    opts.max_iter = 5;
    const GmmModel m = fit_em(normal_rows(20 * d, d, 2), opts);
    const GmmEvaluator ev(m);
    const RowMatrix x = normal_rows(1000, d, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ev.logpdf_rows(x));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_GmmLogpdf)->Args({64, 1})->Args({400, 1})->Args({768, 0})->Unit(benchmark::kMillisecond);

void BM_GmmFitDiagonal(benchmark::State& state) {
    const RowMatrix x = normal_rows(1000, 768, 4);
    EmOptions opts;
    opts.k = 10;
    opts.covariance_type = CovarianceType::Diagonal;
    opts.max_iter = 20;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_em(x, opts));
    }
}
BENCHMARK(BM_GmmFitDiagonal)->Unit(benchmark::kMillisecond);

void BM_KdeMeanNll(benchmark::State& state) {
    const auto n = state.range(0);
    const KdeModel m = fit_kde(normal_rows(n, 50, 5), BandwidthRule::silverman());
    const RowMatrix q = normal_rows(1000, 50, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kde_mean_nll(m, q));
    }
}
BENCHMARK(BM_KdeMeanNll)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_L1Distance(benchmark::State& state) {
    const RowMatrix a = normal_rows(5000, 1, 7);
    const RowMatrix b = normal_rows(5000, 1, 8);
    const Vector va = a.col(0);
    const Vector vb = b.col(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(l1_density_distance(va, vb, {}));
    }
}
BENCHMARK(BM_L1Distance)->Unit(benchmark::kMillisecond);

void BM_FastIca(benchmark::State& state) {
    const auto d = state.range(0);
    const RowMatrix x = normal_rows(1000, 2 * d, 9).array().cube();
    IcaOptions opts;
    opts.max_iterations = 50;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_fastica(x, static_cast<std::size_t>(d), opts));
    }
}
BENCHMARK(BM_FastIca)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PcaFit(benchmark::State& state) {
    const RowMatrix x = normal_rows(1000, 784, 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_pca(x, 400));
    }
}
BENCHMARK(BM_PcaFit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
