#pragma once

// Data-parallel inner loops of the clustering module. Every kernel has a
// serial reference implementation and an OpenMP implementation; tests check
// that both agree and bench/ compares their throughput.

#include <cstddef>
#include <span>
#include <vector>

namespace moralprobe::cluster {

enum class Backend { serial, openmp };

// Non-owning row-major view of n points in `dim` dimensions.
struct PointView {
    std::span<const double> values;
    std::size_t n = 0;
    std::size_t dim = 0;

    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return values.subspan(i * dim, dim);
    }
};

// Owning point set.
class PointSet {
  public:
    PointSet() = default;
    PointSet(std::vector<double> values, std::size_t n, std::size_t dim);

    [[nodiscard]] PointView view() const { return {values_, n_, dim_}; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<double> &values() const noexcept { return values_; }

  private:
    std::vector<double> values_;
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

namespace kernels {

// Assigns each point to its nearest centroid (lowest index on ties), writing
// labels and squared distances. Returns the within-cluster sum of squares.
double assign_nearest_serial(PointView points, std::span<const double> centroids, std::size_t k,
                             std::span<int> labels, std::span<double> sq_dist);
double assign_nearest_openmp(PointView points, std::span<const double> centroids, std::size_t k,
                             std::span<int> labels, std::span<double> sq_dist);

// Full n x n Euclidean distance matrix, row-major.
std::vector<double> pairwise_distances_serial(PointView points);
std::vector<double> pairwise_distances_openmp(PointView points);

// Per-point silhouette values (b - a) / max(a, b) over a precomputed distance
// matrix; points in singleton clusters get 0, as does 0/0.
std::vector<double> silhouette_values_serial(std::span<const double> distances, std::size_t n,
                                             std::span<const int> labels, std::size_t k);
std::vector<double> silhouette_values_openmp(std::span<const double> distances, std::size_t n,
                                             std::span<const int> labels, std::size_t k);

// Backend dispatch.
double assign_nearest(Backend backend, PointView points, std::span<const double> centroids,
                      std::size_t k, std::span<int> labels, std::span<double> sq_dist);
std::vector<double> pairwise_distances(Backend backend, PointView points);
std::vector<double> silhouette_values(Backend backend, std::span<const double> distances,
                                      std::size_t n, std::span<const int> labels, std::size_t k);

} // namespace kernels
} // namespace moralprobe::cluster
