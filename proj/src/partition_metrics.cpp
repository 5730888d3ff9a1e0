#include "moralprobe/clustering.hpp"

#include "moralprobe/errors.hpp"

#include <algorithm>
#include <cmath>

namespace moralprobe::cluster {

namespace {

struct Contingency {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> cells; // rows x cols
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t n = 0;
};

Contingency contingency(const Partition &a, const Partition &b) {
    if (a.size() != b.size()) {
        throw DomainError("partition comparison: length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
    }
    Contingency t;
    t.rows = static_cast<std::size_t>(a.k());
    t.cols = static_cast<std::size_t>(b.k());
    t.cells.assign(t.rows * t.cols, 0);
    t.row_sums.assign(t.rows, 0);
    t.col_sums.assign(t.cols, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto r = static_cast<std::size_t>(a.labels()[i]);
        const auto c = static_cast<std::size_t>(b.labels()[i]);
        ++t.cells[r * t.cols + c];
        ++t.row_sums[r];
        ++t.col_sums[c];
    }
    t.n = static_cast<std::int64_t>(a.size());
    return t;
}

double comb2(std::int64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

double entropy_of(const std::vector<std::int64_t> &sums, std::int64_t n) {
    double h = 0.0;
    for (auto s : sums) {
        if (s > 0) {
            const double p = static_cast<double>(s) / static_cast<double>(n);
            h -= p * std::log(p);
        }
    }
    return h;
}

double mutual_information(const Contingency &t) {
    const auto n = static_cast<double>(t.n);
    double mi = 0.0;
    for (std::size_t r = 0; r < t.rows; ++r) {
        for (std::size_t c = 0; c < t.cols; ++c) {
            const auto nij = t.cells[r * t.cols + c];
            if (nij == 0) {
                continue;
            }
            const double x = static_cast<double>(nij);
            mi += x / n *
                  std::log(n * x /
                           (static_cast<double>(t.row_sums[r]) * static_cast<double>(t.col_sums[c])));
        }
    }
    return std::max(mi, 0.0);
}

double expected_mi(const Contingency &t) {
    const std::int64_t n = t.n;
    const double nd = static_cast<double>(n);
    const double lg_n = std::lgamma(nd + 1.0);
    double emi = 0.0;
    for (auto a : t.row_sums) {
        for (auto b : t.col_sums) {
            const double ad = static_cast<double>(a);
            const double bd = static_cast<double>(b);
            const double fixed = std::lgamma(ad + 1.0) + std::lgamma(bd + 1.0) +
                                 std::lgamma(nd - ad + 1.0) + std::lgamma(nd - bd + 1.0) - lg_n;
            const std::int64_t lo = std::max<std::int64_t>(1, a + b - n);
            const std::int64_t hi = std::min(a, b);
            for (std::int64_t nij = lo; nij <= hi; ++nij) {
                const double x = static_cast<double>(nij);
                const double log_p = fixed - std::lgamma(x + 1.0) - std::lgamma(ad - x + 1.0) -
                                     std::lgamma(bd - x + 1.0) -
                                     std::lgamma(nd - ad - bd + x + 1.0);
                emi += x / nd * std::log(nd * x / (ad * bd)) * std::exp(log_p);
            }
        }
    }
    return emi;
}

} // namespace

double ari(const Partition &a, const Partition &b) {
    const auto t = contingency(a, b);
    if (t.n < 2) {
        return 1.0;
    }
    double index = 0.0;
    for (auto c : t.cells) {
        index += comb2(c);
    }
    double sum_a = 0.0;
    for (auto s : t.row_sums) {
        sum_a += comb2(s);
    }
    double sum_b = 0.0;
    for (auto s : t.col_sums) {
        sum_b += comb2(s);
    }
    const double expected = sum_a * sum_b / comb2(t.n);
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) {
        // Both partitions are all-singletons or both are one cluster.
        return 1.0;
    }
    return (index - expected) / denom;
}

double mutual_information(const Partition &a, const Partition &b) {
    return mutual_information(contingency(a, b));
}

double expected_mutual_information(const Partition &a, const Partition &b) {
    return expected_mi(contingency(a, b));
}

double entropy(const Partition &p) {
    std::vector<std::int64_t> sums;
    for (auto s : p.cluster_sizes()) {
        sums.push_back(static_cast<std::int64_t>(s));
    }
    return entropy_of(sums, static_cast<std::int64_t>(p.size()));
}

double ami(const Partition &a, const Partition &b) {
    const auto t = contingency(a, b);
    if (a == b) {
        return 1.0;
    }
    const double mi = mutual_information(t);
    const double emi = expected_mi(t);
    const double h = 0.5 * (entropy_of(t.row_sums, t.n) + entropy_of(t.col_sums, t.n));
    const double denom = h - emi;
    if (std::fabs(denom) < 1e-15) {
        return 0.0;
    }
    return (mi - emi) / denom;
}

double cas(double ari_value, double ami_value) { return 0.5 * (ari_value + ami_value); }

AlignmentScores alignment(const Partition &a, const Partition &b) {
    const double r = ari(a, b);
    const double m = ami(a, b);
    return {r, m, cas(r, m)};
}

} // namespace moralprobe::cluster
