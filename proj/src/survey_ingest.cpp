#include "moralprobe/survey_ingest.hpp"

#include "moralprobe/csv.hpp"
#include "moralprobe/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace moralprobe::survey {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return std::string{s.substr(first, last - first + 1)};
}

std::string canonical_code(const std::string &raw) {
    std::string code = trim(raw);
    const bool numeric =
        !code.empty() && std::all_of(code.begin(), code.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        });
    if (numeric) {
        const auto nz = code.find_first_not_of('0');
        code = nz == std::string::npos ? "0" : code.substr(nz);
    }
    return code;
}

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    return in;
}

} // namespace

std::string to_string(SurveyKind kind) { return kind == SurveyKind::wvs ? "wvs" : "pew"; }

SurveyKind survey_kind_from_string(const std::string &name) {
    if (name == "wvs" || name == "WVS") {
        return SurveyKind::wvs;
    }
    if (name == "pew" || name == "PEW") {
        return SurveyKind::pew;
    }
    throw ConfigError("unknown dataset '" + name + "' (expected wvs or pew)");
}

const std::vector<std::string> &question_ids(SurveyKind kind) {
    static const std::vector<std::string> wvs = [] {
        std::vector<std::string> ids;
        for (int q = 177; q <= 195; ++q) {
            ids.push_back("Q" + std::to_string(q));
        }
        return ids;
    }();
    static const std::vector<std::string> pew = [] {
        std::vector<std::string> ids;
        for (char c = 'A'; c <= 'H'; ++c) {
            ids.push_back(std::string{"Q84"} + c);
        }
        return ids;
    }();
    return kind == SurveyKind::wvs ? wvs : pew;
}

TopicCatalog::TopicCatalog(SurveyKind kind, std::vector<SurveyTopic> topics)
    : kind_{kind}, topics_{std::move(topics)} {
    const auto &ids = question_ids(kind);
    if (topics_.size() != ids.size()) {
        throw SchemaError("topic catalog for " + to_string(kind) + " must list " +
                          std::to_string(ids.size()) + " questions, found " +
                          std::to_string(topics_.size()));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (topics_[i].question != ids[i]) {
            throw SchemaError("topic catalog: expected " + ids[i] + " at position " +
                              std::to_string(i + 1) + ", found " + topics_[i].question);
        }
        if (topics_[i].label.empty() || topics_[i].phrase.empty()) {
            throw SchemaError("topic catalog: empty label or phrase for " + ids[i]);
        }
    }
}

TopicCatalog TopicCatalog::load(const std::filesystem::path &csv_path, SurveyKind kind) {
    auto in = open_input(csv_path);
    csv::Table table{in};
    const auto q = table.column("question");
    const auto l = table.column("label");
    const auto p = table.column("phrase");
    if (!q || !l || !p) {
        throw SchemaError(csv_path.string() + ": expected columns question,label,phrase");
    }
    std::vector<SurveyTopic> topics;
    std::vector<std::string> f;
    while (table.next(f)) {
        topics.push_back({f[*q], f[*l], f[*p]});
    }
    return {kind, std::move(topics)};
}

const SurveyTopic &TopicCatalog::by_question(const std::string &question) const {
    for (const auto &t : topics_) {
        if (t.question == question) {
            return t;
        }
    }
    throw DomainError("unknown question id " + question);
}

const SurveyTopic &TopicCatalog::by_label(const std::string &label) const {
    for (const auto &t : topics_) {
        if (t.label == label) {
            return t;
        }
    }
    throw DomainError("unknown topic label '" + label + "'");
}

std::vector<std::string> TopicCatalog::labels() const {
    std::vector<std::string> out;
    for (const auto &t : topics_) {
        out.push_back(t.label);
    }
    return out;
}

CountryMap::CountryMap(std::map<std::string, std::string> entries) {
    for (auto &[code, name] : entries) {
        entries_.emplace(canonical_code(code), std::move(name));
    }
}

CountryMap CountryMap::load(const std::filesystem::path &csv_path) {
    auto in = open_input(csv_path);
    csv::Table table{in};
    const auto c = table.column("code");
    const auto n = table.column("country");
    if (!c || !n) {
        throw SchemaError(csv_path.string() + ": expected columns code,country");
    }
    std::map<std::string, std::string> entries;
    std::vector<std::string> f;
    while (table.next(f)) {
        if (!entries.emplace(canonical_code(f[*c]), trim(f[*n])).second) {
            throw SchemaError(csv_path.string() + " line " + std::to_string(table.line()) +
                              ": duplicate code " + f[*c]);
        }
    }
    return CountryMap{std::move(entries)};
}

const std::string *CountryMap::find(const std::string &code) const {
    const auto it = entries_.find(canonical_code(code));
    return it == entries_.end() ? nullptr : &it->second;
}

CsvLayout CsvLayout::defaults(SurveyKind kind) {
    CsvLayout layout;
    layout.country_column = kind == SurveyKind::wvs ? "B_COUNTRY" : "COUNTRY";
    layout.topic_columns = question_ids(kind);
    return layout;
}

RawSurveyTable parse_survey(std::istream &in, SurveyKind kind, const CountryMap &countries,
                            const CsvLayout &layout) {
    const auto &ids = question_ids(kind);
    if (layout.topic_columns.size() != ids.size()) {
        throw ConfigError("layout for " + to_string(kind) + " must name " +
                          std::to_string(ids.size()) + " topic columns");
    }
    csv::Table table{in, layout.delimiter};
    const auto country_col = table.column(layout.country_column);
    if (!country_col) {
        throw SchemaError("missing required column " + layout.country_column);
    }
    std::vector<std::size_t> topic_cols;
    for (const auto &name : layout.topic_columns) {
        const auto col = table.column(name);
        if (!col) {
            throw SchemaError("missing required column " + name);
        }
        topic_cols.push_back(*col);
    }

    RawSurveyTable out{kind, {}};
    std::vector<std::string> f;
    while (table.next(f)) {
        const std::string *country = countries.find(f[*country_col]);
        if (country == nullptr) {
            throw MappingError("line " + std::to_string(table.line()) + ": country code '" +
                               trim(f[*country_col]) + "' not in country map");
        }
        for (std::size_t t = 0; t < topic_cols.size(); ++t) {
            const std::string cell = trim(f[topic_cols[t]]);
            int code = 0;
            const auto *begin = cell.data();
            const auto *end = begin + cell.size();
            const auto [ptr, ec] = std::from_chars(begin, end, code);
            if (cell.empty() || ec != std::errc{} || ptr != end) {
                throw DataError("line " + std::to_string(table.line()) + ": column " +
                                layout.topic_columns[t] + " has non-integer response '" + cell +
                                "'");
            }
            out.rows.push_back({*country, ids[t], code});
        }
    }
    return out;
}

void NonResponsePolicy::validate() const {
    for (int code : zero_codes) {
        if (code >= 0) {
            throw ConfigError("non-response codes must be negative, got " + std::to_string(code));
        }
    }
}

RawSurveyTable clean_nonresponses(RawSurveyTable table, const NonResponsePolicy &policy) {
    policy.validate();
    for (auto &row : table.rows) {
        if (row.code >= 0) {
            continue;
        }
        if (policy.zero_codes.contains(row.code) ||
            policy.unknown_code_action == NonResponsePolicy::UnknownCodeAction::zero) {
            row.code = 0;
        } else {
            throw DataError("unexpected negative response code " + std::to_string(row.code) +
                            " (" + row.country + ", " + row.topic + ")");
        }
    }
    return table;
}

MeanTable aggregate_means(const RawSurveyTable &table) {
    std::map<CellKey, std::pair<double, std::size_t>> sums;
    for (const auto &row : table.rows) {
        auto &[sum, count] = sums[{row.country, row.topic}];
        sum += row.code;
        ++count;
    }
    MeanTable means;
    for (const auto &[key, acc] : sums) {
        means.emplace(key, acc.first / static_cast<double>(acc.second));
    }
    return means;
}

double normalize_wvs(double raw_mean) {
    if (!std::isfinite(raw_mean)) {
        throw NumericError("normalize_wvs: non-finite mean");
    }
    return round4((raw_mean - 5.5) / 4.5);
}

void PewCodebook::validate() const {
    std::set<int> seen;
    for (const auto *group : {&acceptable, &unacceptable, &neutral, &nonresponse}) {
        for (int code : *group) {
            if (!seen.insert(code).second) {
                throw ConfigError("PEW codebook assigns code " + std::to_string(code) +
                                  " to more than one category");
            }
        }
    }
    if (acceptable.empty() || unacceptable.empty()) {
        throw ConfigError("PEW codebook needs acceptable and unacceptable codes");
    }
}

double map_pew_response(int code, const PewCodebook &codebook) {
    if (codebook.acceptable.contains(code)) {
        return 1.0;
    }
    if (codebook.unacceptable.contains(code)) {
        return -1.0;
    }
    if (codebook.neutral.contains(code) || codebook.nonresponse.contains(code)) {
        return 0.0;
    }
    throw DataError("unrecognized PEW response code " + std::to_string(code));
}

MeanTable aggregate_pew_means(const RawSurveyTable &table, const PewCodebook &codebook) {
    codebook.validate();
    const bool exclude = codebook.nonresponse_mode == PewCodebook::NonResponseMode::exclude;
    std::map<CellKey, std::pair<double, std::size_t>> sums;
    for (const auto &row : table.rows) {
        auto &[sum, count] = sums[{row.country, row.topic}];
        const double value = map_pew_response(row.code, codebook);
        if (exclude && codebook.nonresponse.contains(row.code)) {
            continue;
        }
        sum += value;
        ++count;
    }
    MeanTable means;
    for (const auto &[key, acc] : sums) {
        if (acc.second == 0) {
            throw DataError("no substantive responses for (" + key.first + ", " + key.second +
                            "); cannot form a mean");
        }
        means.emplace(key, acc.first / static_cast<double>(acc.second));
    }
    return means;
}

CountryTopicMatrix build_matrix(const MeanTable &means, SurveyKind kind,
                                const TopicCatalog &catalog) {
    if (catalog.kind() != kind) {
        throw DomainError("topic catalog does not belong to " + to_string(kind));
    }
    const auto &ids = question_ids(kind);
    std::set<std::string> country_set;
    for (const auto &[key, value] : means) {
        if (std::find(ids.begin(), ids.end(), key.second) == ids.end()) {
            throw DataError("mean for unknown question " + key.second);
        }
        country_set.insert(key.first);
    }
    if (country_set.empty()) {
        throw DataError("no means to package");
    }
    std::vector<std::string> countries(country_set.begin(), country_set.end());

    std::vector<double> scores;
    std::vector<std::string> missing;
    scores.reserve(countries.size() * ids.size());
    for (const auto &country : countries) {
        for (const auto &q : ids) {
            const auto it = means.find({country, q});
            if (it == means.end()) {
                missing.push_back("(" + country + ", " + q + ")");
                scores.push_back(0.0);
                continue;
            }
            scores.push_back(kind == SurveyKind::wvs ? normalize_wvs(it->second)
                                                     : round4(it->second));
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) {
            list += (i ? ", " : "") + missing[i];
        }
        throw DataError("incomplete country x topic grid; missing cells: " + list);
    }
    return {std::move(countries), catalog.labels(), std::move(scores), Provenance::empirical()};
}

std::string normalization_description(SurveyKind kind) {
    if (kind == SurveyKind::wvs) {
        return "round4((mean(response with codes {-1,-2,-4,-5} -> 0) - 5.5) / 4.5)";
    }
    return "round4(mean(acceptable=+1, not a moral issue=0, unacceptable=-1, non-response=0))";
}

} // namespace moralprobe::survey
