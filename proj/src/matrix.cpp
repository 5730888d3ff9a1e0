#include "moralprobe/matrix.hpp"

#include "moralprobe/csv.hpp"
#include "moralprobe/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

namespace moralprobe {

double round_to(double value, int places) {
    if (!std::isfinite(value)) {
        throw NumericError("cannot round non-finite value");
    }
    if (value == 0.0) {
        return 0.0;
    }
    // Round the shortest decimal form that round-trips to `value`, so that a
    // value printed as 0.2145 rounds to 0.215 even though its binary
    // expansion lies just below the tie.
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, std::abs(value),
                                   std::chars_format::scientific);
    const std::string_view text{buf, static_cast<std::size_t>(res.ptr - buf)};
    const auto e_pos = text.find('e');
    std::string digits;
    for (char ch : text.substr(0, e_pos)) {
        if (ch != '.') {
            digits.push_back(ch);
        }
    }
    int exponent = 0;
    std::from_chars(text.data() + e_pos + (text[e_pos + 1] == '+' ? 2 : 1),
                    text.data() + text.size(), exponent);
    const long keep = static_cast<long>(exponent) + 1 + places;
    if (keep >= static_cast<long>(digits.size())) {
        return value;
    }
    std::string kept = keep > 0 ? digits.substr(0, static_cast<std::size_t>(keep)) : "0";
    const char next = keep >= 0 ? digits[static_cast<std::size_t>(keep)] : '0';
    if (next >= '5') {
        auto i = kept.size();
        while (i > 0 && kept[i - 1] == '9') {
            kept[--i] = '0';
        }
        if (i == 0) {
            kept.insert(kept.begin(), '1');
        } else {
            ++kept[i - 1];
        }
    }
    const std::string scaled = kept + "e" + std::to_string(-places);
    double magnitude = 0.0;
    std::from_chars(scaled.data(), scaled.data() + scaled.size(), magnitude);
    return value < 0.0 ? -magnitude : magnitude;
}

std::string format_fixed(double value, int places) {
    if (!std::isfinite(value)) {
        return "nan";
    }
    double rounded = round_to(value, places);
    if (rounded == 0.0) {
        rounded = 0.0; // drop the sign of negative zero
    }
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, rounded,
                                      std::chars_format::fixed, places);
    return {buffer, result.ptr};
}

std::string Provenance::describe() const {
    return kind == Kind::empirical ? "empirical" : "model(" + model_id + ")";
}

CountryTopicMatrix::CountryTopicMatrix(std::vector<std::string> countries,
                                       std::vector<std::string> topics,
                                       std::vector<double> scores, Provenance provenance)
    : countries_{std::move(countries)}, topics_{std::move(topics)}, scores_{std::move(scores)},
      provenance_{std::move(provenance)} {
    if (scores_.size() != countries_.size() * topics_.size()) {
        throw DomainError("matrix: score count does not match countries x topics");
    }
    if (std::set<std::string>(countries_.begin(), countries_.end()).size() != countries_.size()) {
        throw DomainError("matrix: duplicate country label");
    }
    if (std::set<std::string>(topics_.begin(), topics_.end()).size() != topics_.size()) {
        throw DomainError("matrix: duplicate topic label");
    }
    for (double v : scores_) {
        if (!std::isfinite(v)) {
            throw NumericError("matrix: non-finite score");
        }
    }
}

std::vector<double> CountryTopicMatrix::column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        out[r] = at(r, c);
    }
    return out;
}

std::optional<std::size_t> CountryTopicMatrix::country_index(std::string_view name) const {
    for (std::size_t i = 0; i < countries_.size(); ++i) {
        if (countries_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> CountryTopicMatrix::topic_index(std::string_view name) const {
    for (std::size_t i = 0; i < topics_.size(); ++i) {
        if (topics_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

CountryTopicMatrix CountryTopicMatrix::select(const std::vector<std::string> &countries,
                                              const std::vector<std::string> &topics) const {
    std::vector<std::size_t> row_idx;
    std::vector<std::size_t> col_idx;
    for (const auto &c : countries) {
        const auto i = country_index(c);
        if (!i) {
            throw DomainError("matrix: unknown country '" + c + "'");
        }
        row_idx.push_back(*i);
    }
    for (const auto &t : topics) {
        const auto j = topic_index(t);
        if (!j) {
            throw DomainError("matrix: unknown topic '" + t + "'");
        }
        col_idx.push_back(*j);
    }
    std::vector<double> values;
    values.reserve(row_idx.size() * col_idx.size());
    for (auto r : row_idx) {
        for (auto c : col_idx) {
            values.push_back(at(r, c));
        }
    }
    return {countries, topics, std::move(values), provenance_};
}

std::vector<std::string> intersect_names(const std::vector<std::string> &first,
                                         const std::vector<std::string> &second) {
    const std::set<std::string> other(second.begin(), second.end());
    std::vector<std::string> out;
    for (const auto &name : first) {
        if (other.contains(name)) {
            out.push_back(name);
        }
    }
    return out;
}

void write_matrix_csv(std::ostream &out, const CountryTopicMatrix &matrix) {
    std::vector<std::string> fields{"country"};
    fields.insert(fields.end(), matrix.topics().begin(), matrix.topics().end());
    csv::write_row(out, fields);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        fields.assign({matrix.countries()[r]});
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            fields.push_back(format_fixed(matrix.at(r, c), 4));
        }
        csv::write_row(out, fields);
    }
}

CountryTopicMatrix read_matrix_csv(std::istream &in, Provenance provenance) {
    csv::Table table{in};
    const auto &header = table.header();
    if (header.empty() || header[0] != "country") {
        throw SchemaError("matrix file: first column must be 'country'");
    }
    std::vector<std::string> topics(header.begin() + 1, header.end());
    std::vector<std::string> countries;
    std::vector<double> values;
    std::vector<std::string> fields;
    while (table.next(fields)) {
        countries.push_back(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            const auto *begin = fields[i].data();
            const auto *end = begin + fields[i].size();
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc{} || ptr != end) {
                throw DataError("matrix file line " + std::to_string(table.line()) +
                                ": bad number '" + fields[i] + "'");
            }
            values.push_back(v);
        }
    }
    return {std::move(countries), std::move(topics), std::move(values), std::move(provenance)};
}

void write_matrix_files(const std::filesystem::path &csv_path, const CountryTopicMatrix &matrix,
                        const MatrixSidecar &sidecar) {
    if (csv_path.has_parent_path()) {
        std::filesystem::create_directories(csv_path.parent_path());
    }
    {
        std::ofstream out{csv_path, std::ios::binary};
        if (!out) {
            throw ConfigError("cannot write " + csv_path.string());
        }
        write_matrix_csv(out, matrix);
    }
    nlohmann::json meta = {
        {"survey_kind", sidecar.survey_kind},
        {"rows", sidecar.rows},
        {"columns", sidecar.cols},
        {"normalization", sidecar.normalization},
        {"provenance", sidecar.provenance},
    };
    auto json_path = csv_path;
    json_path.replace_extension(".json");
    std::ofstream out{json_path, std::ios::binary};
    if (!out) {
        throw ConfigError("cannot write " + json_path.string());
    }
    out << meta.dump(2) << '\n';
}

CountryTopicMatrix load_matrix_file(const std::filesystem::path &csv_path) {
    std::ifstream in{csv_path, std::ios::binary};
    if (!in) {
        throw ConfigError("cannot open matrix file " + csv_path.string());
    }
    return read_matrix_csv(in, Provenance::empirical());
}

} // namespace moralprobe
