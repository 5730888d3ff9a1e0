#include "moralprobe/clustering_kernels.hpp"

#include "moralprobe/errors.hpp"

#include <cmath>
#include <limits>

namespace moralprobe::cluster {

PointSet::PointSet(std::vector<double> values, std::size_t n, std::size_t dim)
    : values_{std::move(values)}, n_{n}, dim_{dim} {
    if (values_.size() != n_ * dim_) {
        throw DomainError("point set: value count does not match n x dim");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw NumericError("point set: non-finite coordinate");
        }
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        sum += diff * diff;
    }
    return sum;
}

namespace kernels {

namespace {

inline void nearest(PointView points, std::span<const double> centroids, std::size_t k,
                    std::size_t i, int &label, double &best) {
    const auto p = points.point(i);
    best = std::numeric_limits<double>::infinity();
    label = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(p, centroids.subspan(c * points.dim, points.dim));
        if (d < best) {
            best = d;
            label = static_cast<int>(c);
        }
    }
}

inline double silhouette_of(std::span<const double> distances, std::size_t n,
                            std::span<const int> labels, std::size_t k,
                            std::span<const std::size_t> sizes, std::size_t i,
                            std::vector<double> &sums) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1) {
        return 0.0;
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            sums[static_cast<std::size_t>(labels[j])] += distances[i * n + j];
        }
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        if (c != own && sizes[c] > 0) {
            b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
    }
    const double denom = std::max(a, b);
    return denom > 0.0 ? (b - a) / denom : 0.0;
}

std::vector<std::size_t> cluster_sizes(std::span<const int> labels, std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= k) {
            throw DomainError("silhouette: label out of range");
        }
        ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

} // namespace

double assign_nearest_serial(PointView points, std::span<const double> centroids, std::size_t k,
                             std::span<int> labels, std::span<double> sq_dist) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < points.n; ++i) {
        nearest(points, centroids, k, i, labels[i], sq_dist[i]);
        wcss += sq_dist[i];
    }
    return wcss;
}

double assign_nearest_openmp(PointView points, std::span<const double> centroids, std::size_t k,
                             std::span<int> labels, std::span<double> sq_dist) {
    const auto n = static_cast<std::ptrdiff_t>(points.n);
    double wcss = 0.0;
#pragma omp parallel for reduction(+ : wcss) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        nearest(points, centroids, k, idx, labels[idx], sq_dist[idx]);
        wcss += sq_dist[idx];
    }
    return wcss;
}

std::vector<double> pairwise_distances_serial(PointView points) {
    const std::size_t n = points.n;
    std::vector<double> out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(squared_distance(points.point(i), points.point(j)));
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    return out;
}

std::vector<double> pairwise_distances_openmp(PointView points) {
    const std::size_t n = points.n;
    std::vector<double> out(n * n, 0.0);
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
        // Row i owns pairs (i, j > i), so the mirrored writes never collide.
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(squared_distance(points.point(i), points.point(j)));
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    return out;
}

std::vector<double> silhouette_values_serial(std::span<const double> distances, std::size_t n,
                                             std::span<const int> labels, std::size_t k) {
    const auto sizes = cluster_sizes(labels, k);
    std::vector<double> out(n);
    std::vector<double> sums(k);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = silhouette_of(distances, n, labels, k, sizes, i, sums);
    }
    return out;
}

std::vector<double> silhouette_values_openmp(std::span<const double> distances, std::size_t n,
                                             std::span<const int> labels, std::size_t k) {
    const auto sizes = cluster_sizes(labels, k);
    std::vector<double> out(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
    {
        std::vector<double> sums(k);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            out[idx] = silhouette_of(distances, n, labels, k, sizes, idx, sums);
        }
    }
    return out;
}

double assign_nearest(Backend backend, PointView points, std::span<const double> centroids,
                      std::size_t k, std::span<int> labels, std::span<double> sq_dist) {
    return backend == Backend::openmp
               ? assign_nearest_openmp(points, centroids, k, labels, sq_dist)
               : assign_nearest_serial(points, centroids, k, labels, sq_dist);
}

std::vector<double> pairwise_distances(Backend backend, PointView points) {
    return backend == Backend::openmp ? pairwise_distances_openmp(points)
                                      : pairwise_distances_serial(points);
}

std::vector<double> silhouette_values(Backend backend, std::span<const double> distances,
                                      std::size_t n, std::span<const int> labels, std::size_t k) {
    return backend == Backend::openmp ? silhouette_values_openmp(distances, n, labels, k)
                                      : silhouette_values_serial(distances, n, labels, k);
}

} // namespace kernels
} // namespace moralprobe::cluster
