#include "moralprobe/stats.hpp"

#include "moralprobe/errors.hpp"
#include "moralprobe/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moralprobe::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) {
        throw DomainError("mean of an empty sample");
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs, VarianceMode mode) {
    const std::size_t needed = mode == VarianceMode::population ? 1 : 2;
    if (xs.size() < needed) {
        throw DomainError("variance needs at least " + std::to_string(needed) + " values");
    }
    // Centre on the first value so a constant sample gives exactly zero.
    const double shift = xs[0];
    double sum = 0.0;
    for (double x : xs) {
        sum += x - shift;
    }
    const double m = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        const double d = (x - shift) - m;
        ss += d * d;
    }
    const double denom = mode == VarianceMode::population ? static_cast<double>(xs.size())
                                                          : static_cast<double>(xs.size() - 1);
    return ss / denom;
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw DomainError("pearson: length mismatch (" + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
    }
    const std::size_t n = xs.size();
    if (n < 3) {
        throw DomainError("pearson: need at least 3 pairs");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i] - xs[0];
        my += ys[i] - ys[0];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = (xs[i] - xs[0]) - mx;
        const double dy = (ys[i] - ys[0]) - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DomainError("pearson: degenerate input (constant vector)");
    }
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    CorrelationResult out{r, 0.0, n};
    if (std::fabs(r) < 1.0) {
        const double dof = static_cast<double>(n - 2);
        const double t = r * std::sqrt(dof / (1.0 - r * r));
        out.p_value = std::min(1.0, 2.0 * t_sf(std::fabs(t), static_cast<int>(n - 2)));
    }
    return out;
}

ChiSquareResult chi_square_2x2(const Contingency2x2 &counts) {
    std::array<double, 2> row{};
    std::array<double, 2> col{};
    double total = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (counts[i][j] < 0) {
                throw DomainError("chi_square_2x2: negative count");
            }
            const auto c = static_cast<double>(counts[i][j]);
            row[i] += c;
            col[j] += c;
            total += c;
        }
    }
    if (row[0] == 0 || row[1] == 0 || col[0] == 0 || col[1] == 0) {
        throw DomainError("chi_square_2x2: degenerate table (a marginal is zero)");
    }
    double statistic = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double expected = row[i] * col[j] / total;
            const double diff = static_cast<double>(counts[i][j]) - expected;
            statistic += diff * diff / expected;
        }
    }
    return {statistic, 1, chi_square_sf(statistic, 1), counts};
}

} // namespace moralprobe::stats
