#pragma once

#include "moralprobe/clustering_kernels.hpp"
#include "moralprobe/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace moralprobe::cluster {

// Assignment of items to clusters. Labels are stored in canonical form:
// renumbered 0..k-1 in order of first appearance, so two partitions that
// group items identically compare equal regardless of the ids used.
class Partition {
  public:
    Partition() = default;
    static Partition from_labels(const std::vector<int> &labels);

    [[nodiscard]] const std::vector<int> &labels() const noexcept { return labels_; }
    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::vector<std::size_t> cluster_sizes() const;

    bool operator==(const Partition &) const = default;

  private:
    std::vector<int> labels_;
    int k_ = 0;
};

struct KMeansConfig {
    int k_min = 2;
    int k_max = 10;
    int restarts = 20;
    int max_iters = 300;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;
    Backend backend = Backend::openmp;

    void validate() const;
};

struct KMeansResult {
    Partition partition;
    double wcss = 0.0;
    std::vector<double> centroids; // k x dim, in canonical label order
    int restart = 0;               // index of the winning restart
};

// Lloyd iteration from k-means++ seeding; best of `restarts` runs by WCSS,
// earliest restart on ties. Restart r draws from a generator seeded with
// (seed, r), so results do not depend on the backend or thread count.
// An empty cluster is re-seeded with the point farthest from its centroid.
KMeansResult kmeans(PointView points, int k, const KMeansConfig &config);

// Mean silhouette with Euclidean distances; k must be >= 2.
double silhouette(PointView points, const Partition &partition, Backend backend = Backend::openmp);

struct SelectKResult {
    int k = 0;
    Partition partition;
    double silhouette = 0.0;
    std::vector<std::pair<int, double>> scores; // (k, silhouette) for every feasible k
};

// Best k in [k_min, k_max] by silhouette; ties go to the smaller k. k values
// larger than the number of points are skipped.
SelectKResult select_k(PointView points, const KMeansConfig &config);

enum class Linkage { average, complete, single };

std::string to_string(Linkage linkage);
Linkage linkage_from_string(const std::string &name);

// Bottom-up merging on Euclidean distance, stopped at k clusters. Among equal
// linkage distances the pair with the lowest (i, j) slot indices merges first,
// where a merged cluster keeps the lower slot.
Partition agglomerative(PointView points, int k, Linkage linkage = Linkage::average,
                        Backend backend = Backend::openmp);

struct AlignmentScores {
    double ari = 0.0;
    double ami = 0.0;
    double cas = 0.0;
};

double ari(const Partition &a, const Partition &b);
// Arithmetic-mean entropy normalisation; expected MI from the exact
// hypergeometric model.
double ami(const Partition &a, const Partition &b);
double expected_mutual_information(const Partition &a, const Partition &b);
double mutual_information(const Partition &a, const Partition &b);
double entropy(const Partition &p);
double cas(double ari, double ami);
AlignmentScores alignment(const Partition &a, const Partition &b);

// Rows of a matrix as points.
PointSet points_from_matrix(const CountryTopicMatrix &matrix);

} // namespace moralprobe::cluster
