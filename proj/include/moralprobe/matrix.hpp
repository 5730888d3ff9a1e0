#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moralprobe {

// Rounds half away from zero to `places` decimals, judged on the shortest
// decimal form of `value` (so 0.2145 rounds to 0.215 at 3 places).
double round_to(double value, int places);
inline double round4(double value) { return round_to(value, 4); }

// Fixed-point rendering used by every emitted file; "-0.0000" is printed as "0.0000".
std::string format_fixed(double value, int places);

struct Provenance {
    enum class Kind { empirical, model };
    Kind kind = Kind::empirical;
    std::string model_id; // empty for empirical data

    static Provenance empirical() { return {}; }
    static Provenance model(std::string id) { return {Kind::model, std::move(id)}; }
    [[nodiscard]] std::string describe() const;
    bool operator==(const Provenance &) const = default;
};

// Dense country x topic table of moral scores, row-major.
class CountryTopicMatrix {
  public:
    CountryTopicMatrix() = default;
    CountryTopicMatrix(std::vector<std::string> countries, std::vector<std::string> topics,
                       std::vector<double> scores, Provenance provenance);

    [[nodiscard]] std::size_t rows() const noexcept { return countries_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return topics_.size(); }
    [[nodiscard]] const std::vector<std::string> &countries() const noexcept { return countries_; }
    [[nodiscard]] const std::vector<std::string> &topics() const noexcept { return topics_; }
    [[nodiscard]] const std::vector<double> &scores() const noexcept { return scores_; }
    [[nodiscard]] const Provenance &provenance() const noexcept { return provenance_; }

    [[nodiscard]] double at(std::size_t row, std::size_t col) const {
        return scores_[row * cols() + col];
    }
    double &at(std::size_t row, std::size_t col) { return scores_[row * cols() + col]; }

    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {scores_.data() + r * cols(), cols()};
    }
    [[nodiscard]] std::vector<double> column(std::size_t c) const;

    [[nodiscard]] std::optional<std::size_t> country_index(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> topic_index(std::string_view name) const;

    // Sub-matrix in the given order; every name must exist.
    [[nodiscard]] CountryTopicMatrix select(const std::vector<std::string> &countries,
                                            const std::vector<std::string> &topics) const;
    [[nodiscard]] CountryTopicMatrix select_topics(const std::vector<std::string> &topics) const {
        return select(countries_, topics);
    }

    bool operator==(const CountryTopicMatrix &) const = default;

  private:
    std::vector<std::string> countries_;
    std::vector<std::string> topics_;
    std::vector<double> scores_;
    Provenance provenance_;
};

// Names present in both lists, in the order of `first`.
std::vector<std::string> intersect_names(const std::vector<std::string> &first,
                                         const std::vector<std::string> &second);

// Canonical matrix file: header `country,<topic...>`, values at 4 decimals.
void write_matrix_csv(std::ostream &out, const CountryTopicMatrix &matrix);
CountryTopicMatrix read_matrix_csv(std::istream &in, Provenance provenance);

struct MatrixSidecar {
    std::string survey_kind;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string normalization;
    std::string provenance;
};

void write_matrix_files(const std::filesystem::path &csv_path, const CountryTopicMatrix &matrix,
                        const MatrixSidecar &sidecar);
CountryTopicMatrix load_matrix_file(const std::filesystem::path &csv_path);

} // namespace moralprobe
