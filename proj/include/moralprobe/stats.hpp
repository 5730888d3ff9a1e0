#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace moralprobe::stats {

enum class VarianceMode { population, sample };

double mean(std::span<const double> xs);
double variance(std::span<const double> xs, VarianceMode mode = VarianceMode::population);

struct CorrelationResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

// Pearson r with a two-tailed p-value from t = r * sqrt((n - 2) / (1 - r^2)).
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

// counts[row][col]; rows are the truth labels, columns the predictions.
using Contingency2x2 = std::array<std::array<std::int64_t, 2>, 2>;

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 1;
    double p_value = 1.0;
    Contingency2x2 contingency{};
};

// Pearson chi-squared test of association without continuity correction.
ChiSquareResult chi_square_2x2(const Contingency2x2 &counts);

} // namespace moralprobe::stats
