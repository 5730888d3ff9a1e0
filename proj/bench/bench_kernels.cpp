#include "moralprobe/clustering.hpp"
#include "moralprobe/clustering_kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace moralprobe::cluster;

PointSet random_points(std::size_t n, std::size_t dim) {
    std::mt19937_64 rng{42};
    std::normal_distribution<double> d{0.0, 1.0};
    std::vector<double> v(n * dim);
    for (auto &x : v) {
        x = d(rng);
    }
    return {std::move(v), n, dim};
}

std::vector<int> round_robin_labels(std::size_t n, std::size_t k) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(i % k);
    }
    return labels;
}

void assign(benchmark::State &state, Backend backend) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 19;
    const std::size_t k = 8;
    const auto points = random_points(n, dim);
    const auto centroids = random_points(k, dim);
    std::vector<int> labels(n);
    std::vector<double> sq(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::assign_nearest(backend, points.view(), centroids.values(),
                                                         k, labels, sq));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void pairwise(benchmark::State &state, Backend backend) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 19);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::pairwise_distances(backend, points.view()));
    }
}

void silhouette_kernel(benchmark::State &state, Backend backend) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto points = random_points(n, 19);
    const auto dist = kernels::pairwise_distances(Backend::serial, points.view());
    const auto labels = round_robin_labels(n, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::silhouette_values(backend, dist, n, labels, 6));
    }
}

void kmeans_restarts(benchmark::State &state, Backend backend) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 19);
    KMeansConfig config;
    config.backend = backend;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kmeans(points.view(), 5, config).wcss);
    }
}

} // namespace

BENCHMARK_CAPTURE(assign, serial, Backend::serial)->Arg(1000)->Arg(100000);
BENCHMARK_CAPTURE(assign, openmp, Backend::openmp)->Arg(1000)->Arg(100000);
BENCHMARK_CAPTURE(pairwise, serial, Backend::serial)->Arg(64)->Arg(1024);
BENCHMARK_CAPTURE(pairwise, openmp, Backend::openmp)->Arg(64)->Arg(1024);
BENCHMARK_CAPTURE(silhouette_kernel, serial, Backend::serial)->Arg(64)->Arg(1024);
BENCHMARK_CAPTURE(silhouette_kernel, openmp, Backend::openmp)->Arg(64)->Arg(1024);
BENCHMARK_CAPTURE(kmeans_restarts, serial, Backend::serial)->Arg(66)->Arg(2000);
BENCHMARK_CAPTURE(kmeans_restarts, openmp, Backend::openmp)->Arg(66)->Arg(2000);

BENCHMARK_MAIN();
