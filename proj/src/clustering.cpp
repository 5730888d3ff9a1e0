#include "moralprobe/clustering.hpp"

#include "moralprobe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace moralprobe::cluster {

Partition Partition::from_labels(const std::vector<int> &labels) {
    Partition p;
    std::map<int, int> remap;
    p.labels_.reserve(labels.size());
    for (int l : labels) {
        const auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
        p.labels_.push_back(it->second);
    }
    p.k_ = static_cast<int>(remap.size());
    return p;
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
    for (int l : labels_) {
        ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

void KMeansConfig::validate() const {
    if (k_min < 2 || k_max < k_min) {
        throw ConfigError("kmeans: need 2 <= k_min <= k_max");
    }
    if (restarts < 1 || max_iters < 1) {
        throw ConfigError("kmeans: restarts and max_iters must be >= 1");
    }
    if (!(tolerance >= 0.0)) {
        throw ConfigError("kmeans: tolerance must be >= 0");
    }
}

namespace {

struct RunResult {
    std::vector<int> labels;
    std::vector<double> centroids;
    double wcss = std::numeric_limits<double>::infinity();
};

std::vector<double> kmeanspp_seed(PointView points, std::size_t k, std::mt19937_64 &rng) {
    const std::size_t n = points.n;
    const std::size_t dim = points.dim;
    std::vector<double> centroids;
    centroids.reserve(k * dim);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto first = points.point(pick(rng));
    centroids.insert(centroids.end(), first.begin(), first.end());

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = squared_distance(points.point(i), first);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double running = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                running += d2[i];
                if (running > target && d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        const auto p = points.point(chosen);
        centroids.insert(centroids.end(), p.begin(), p.end());
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points.point(i), p));
        }
    }
    return centroids;
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
void repair_empty(PointView points, std::size_t k, std::vector<int> &labels,
                  std::vector<double> &sq_dist, std::vector<double> &centroids) {
    std::vector<std::size_t> sizes(k, 0);
    for (int l : labels) {
        ++sizes[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) {
            continue;
        }
        std::size_t far = points.n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.n; ++i) {
            if (sizes[static_cast<std::size_t>(labels[i])] > 1 && sq_dist[i] > far_d) {
                far = i;
                far_d = sq_dist[i];
            }
        }
        --sizes[static_cast<std::size_t>(labels[far])];
        labels[far] = static_cast<int>(c);
        sq_dist[far] = 0.0;
        ++sizes[c];
        const auto p = points.point(far);
        std::copy(p.begin(), p.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * points.dim));
    }
}

RunResult lloyd_run(PointView points, std::size_t k, const KMeansConfig &config, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng{seq};
    const std::size_t n = points.n;
    const std::size_t dim = points.dim;

    RunResult run;
    run.centroids = kmeanspp_seed(points, k, rng);
    run.labels.assign(n, 0);
    std::vector<double> sq_dist(n);
    std::vector<double> next(k * dim);
    std::vector<std::size_t> sizes(k);

    for (int iter = 0; iter < config.max_iters; ++iter) {
        kernels::assign_nearest_serial(points, run.centroids, k, run.labels, sq_dist);
        repair_empty(points, k, run.labels, sq_dist, run.centroids);

        std::fill(next.begin(), next.end(), 0.0);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(run.labels[i]);
            ++sizes[c];
            const auto p = points.point(i);
            for (std::size_t d = 0; d < dim; ++d) {
                next[c * dim + d] += p[d];
            }
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t d = 0; d < dim; ++d) {
                next[c * dim + d] /= static_cast<double>(sizes[c]);
            }
            shift = std::max(shift, squared_distance({next.data() + c * dim, dim},
                                                     {run.centroids.data() + c * dim, dim}));
        }
        run.centroids.swap(next);
        if (std::sqrt(shift) <= config.tolerance) {
            break;
        }
    }
    kernels::assign_nearest_serial(points, run.centroids, k, run.labels, sq_dist);
    repair_empty(points, k, run.labels, sq_dist, run.centroids);
    run.wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        run.wcss += squared_distance(points.point(i),
                                     {run.centroids.data() + static_cast<std::size_t>(run.labels[i]) * dim, dim});
    }
    return run;
}

} // namespace

KMeansResult kmeans(PointView points, int k, const KMeansConfig &config) {
    config.validate();
    if (k < 1) {
        throw DomainError("kmeans: k must be >= 1");
    }
    if (static_cast<std::size_t>(k) > points.n) {
        throw DomainError("kmeans: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(points.n) + " points");
    }
    const auto kk = static_cast<std::size_t>(k);
    std::vector<RunResult> runs(static_cast<std::size_t>(config.restarts));
    if (config.backend == Backend::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < config.restarts; ++r) {
            runs[static_cast<std::size_t>(r)] = lloyd_run(points, kk, config, r);
        }
    } else {
        for (int r = 0; r < config.restarts; ++r) {
            runs[static_cast<std::size_t>(r)] = lloyd_run(points, kk, config, r);
        }
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].wcss < runs[best].wcss) {
            best = r;
        }
    }
    auto &win = runs[best];
    KMeansResult out;
    out.partition = Partition::from_labels(win.labels);
    out.wcss = win.wcss;
    out.restart = static_cast<int>(best);
    // Reorder centroids to canonical label order.
    out.centroids.resize(win.centroids.size());
    for (std::size_t i = 0; i < points.n; ++i) {
        const auto from = static_cast<std::size_t>(win.labels[i]);
        const auto to = static_cast<std::size_t>(out.partition.labels()[i]);
        std::copy_n(win.centroids.begin() + static_cast<std::ptrdiff_t>(from * points.dim),
                    points.dim, out.centroids.begin() + static_cast<std::ptrdiff_t>(to * points.dim));
    }
    return out;
}

double silhouette(PointView points, const Partition &partition, Backend backend) {
    if (partition.k() < 2) {
        throw DomainError("silhouette: need at least 2 clusters");
    }
    if (partition.size() != points.n) {
        throw DomainError("silhouette: partition size does not match point count");
    }
    const auto distances = kernels::pairwise_distances(backend, points);
    const auto values = kernels::silhouette_values(backend, distances, points.n,
                                                   partition.labels(),
                                                   static_cast<std::size_t>(partition.k()));
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(points.n);
}

SelectKResult select_k(PointView points, const KMeansConfig &config) {
    config.validate();
    SelectKResult out;
    bool found = false;
    for (int k = config.k_min; k <= config.k_max; ++k) {
        if (static_cast<std::size_t>(k) > points.n) {
            break;
        }
        auto fit = kmeans(points, k, config);
        const double s = silhouette(points, fit.partition, config.backend);
        out.scores.emplace_back(k, s);
        if (!found || s > out.silhouette) {
            out.k = k;
            out.partition = std::move(fit.partition);
            out.silhouette = s;
            found = true;
        }
    }
    if (!found) {
        throw DomainError("select_k: no feasible k in [" + std::to_string(config.k_min) + ", " +
                          std::to_string(config.k_max) + "] for " + std::to_string(points.n) +
                          " points");
    }
    return out;
}

std::string to_string(Linkage linkage) {
    switch (linkage) {
    case Linkage::average:
        return "average";
    case Linkage::complete:
        return "complete";
    case Linkage::single:
        return "single";
    }
    return "average";
}

Linkage linkage_from_string(const std::string &name) {
    if (name == "average") {
        return Linkage::average;
    }
    if (name == "complete") {
        return Linkage::complete;
    }
    if (name == "single") {
        return Linkage::single;
    }
    throw ConfigError("unknown linkage '" + name + "'");
}

Partition agglomerative(PointView points, int k, Linkage linkage, Backend backend) {
    const std::size_t n = points.n;
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw DomainError("agglomerative: k = " + std::to_string(k) + " infeasible for " +
                          std::to_string(n) + " points");
    }
    auto dist = kernels::pairwise_distances(backend, points);
    std::vector<int> slot_of(n);
    std::iota(slot_of.begin(), slot_of.end(), 0);
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);

    for (std::size_t clusters = n; clusters > static_cast<std::size_t>(k); --clusters) {
        std::size_t bi = 0;
        std::size_t bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) {
                continue;
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                if (active[j] && dist[i * n + j] < best) {
                    best = dist[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        // Lance-Williams update of slot bi, which absorbs bj.
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == bi || m == bj) {
                continue;
            }
            const double di = dist[bi * n + m];
            const double dj = dist[bj * n + m];
            double merged = 0.0;
            switch (linkage) {
            case Linkage::average:
                merged = (static_cast<double>(size[bi]) * di + static_cast<double>(size[bj]) * dj) /
                         static_cast<double>(size[bi] + size[bj]);
                break;
            case Linkage::complete:
                merged = std::max(di, dj);
                break;
            case Linkage::single:
                merged = std::min(di, dj);
                break;
            }
            dist[bi * n + m] = merged;
            dist[m * n + bi] = merged;
        }
        size[bi] += size[bj];
        active[bj] = false;
        for (auto &s : slot_of) {
            if (s == static_cast<int>(bj)) {
                s = static_cast<int>(bi);
            }
        }
    }
    return Partition::from_labels(slot_of);
}

PointSet points_from_matrix(const CountryTopicMatrix &matrix) {
    return {matrix.scores(), matrix.rows(), matrix.cols()};
}

} // namespace moralprobe::cluster
