#pragma once

#include "moralprobe/matrix.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace moralprobe::survey {

enum class SurveyKind { wvs, pew };

std::string to_string(SurveyKind kind);
SurveyKind survey_kind_from_string(const std::string &name);

// Question ids in questionnaire order: Q177..Q195 for WVS, Q84A..Q84H for PEW.
const std::vector<std::string> &question_ids(SurveyKind kind);

struct SurveyTopic {
    std::string question; // e.g. "Q186"
    std::string label;    // matrix column label, e.g. "Sex before marriage"
    std::string phrase;   // prompt phrasing, e.g. "sex before marriage"
};

// Topic metadata in question order. Loading checks that the file covers exactly
// the question ids of `kind`.
class TopicCatalog {
  public:
    TopicCatalog() = default;
    TopicCatalog(SurveyKind kind, std::vector<SurveyTopic> topics);

    static TopicCatalog load(const std::filesystem::path &csv_path, SurveyKind kind);

    [[nodiscard]] SurveyKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<SurveyTopic> &topics() const noexcept { return topics_; }
    [[nodiscard]] const SurveyTopic &by_question(const std::string &question) const;
    [[nodiscard]] const SurveyTopic &by_label(const std::string &label) const;
    [[nodiscard]] std::vector<std::string> labels() const;

  private:
    SurveyKind kind_ = SurveyKind::wvs;
    std::vector<SurveyTopic> topics_;
};

// Survey country code -> country name. Purely numeric codes are matched
// without leading zeros.
class CountryMap {
  public:
    CountryMap() = default;
    explicit CountryMap(std::map<std::string, std::string> entries);
    static CountryMap load(const std::filesystem::path &csv_path);

    [[nodiscard]] const std::string *find(const std::string &code) const;
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  private:
    std::map<std::string, std::string> entries_;
};

struct RawResponse {
    std::string country; // resolved country name
    std::string topic;   // question id
    int code = 0;
    bool operator==(const RawResponse &) const = default;
};

struct RawSurveyTable {
    SurveyKind kind = SurveyKind::wvs;
    std::vector<RawResponse> rows;
};

// Column layout of a raw export. Defaults follow the public releases.
struct CsvLayout {
    char delimiter = ',';
    std::string country_column;
    std::vector<std::string> topic_columns; // aligned with question_ids(kind)

    static CsvLayout defaults(SurveyKind kind);
};

RawSurveyTable parse_survey(std::istream &in, SurveyKind kind, const CountryMap &countries,
                            const CsvLayout &layout);
inline RawSurveyTable parse_wvs(std::istream &in, const CountryMap &countries,
                                const CsvLayout &layout = CsvLayout::defaults(SurveyKind::wvs)) {
    return parse_survey(in, SurveyKind::wvs, countries, layout);
}
inline RawSurveyTable parse_pew(std::istream &in, const CountryMap &countries,
                                const CsvLayout &layout = CsvLayout::defaults(SurveyKind::pew)) {
    return parse_survey(in, SurveyKind::pew, countries, layout);
}

struct NonResponsePolicy {
    enum class UnknownCodeAction { error, zero };

    std::set<int> zero_codes{-1, -2, -4, -5};
    UnknownCodeAction unknown_code_action = UnknownCodeAction::error;

    void validate() const;
};

// Replaces non-response codes with 0. Idempotent.
RawSurveyTable clean_nonresponses(RawSurveyTable table, const NonResponsePolicy &policy);

using CellKey = std::pair<std::string, std::string>; // (country, question id)
using MeanTable = std::map<CellKey, double>;

// Flat arithmetic mean of the (cleaned) response codes per country and question.
MeanTable aggregate_means(const RawSurveyTable &table);

// round4((mean - 5.5) / 4.5): 1 -> -1, 10 -> +1. Not clamped.
double normalize_wvs(double raw_mean);

struct PewCodebook {
    enum class NonResponseMode { zero, exclude };

    std::set<int> acceptable{1};
    std::set<int> unacceptable{2};
    std::set<int> neutral{3, 4}; // "not a moral issue", "depends on situation"
    std::set<int> nonresponse{8, 9};
    NonResponseMode nonresponse_mode = NonResponseMode::zero;

    void validate() const;
};

// +1 acceptable, -1 unacceptable, 0 neutral or non-response.
double map_pew_response(int code, const PewCodebook &codebook);

// Mean of mapped PEW responses per cell. In exclude mode non-responses are
// dropped from the mean; a cell left with no responses is an error.
MeanTable aggregate_pew_means(const RawSurveyTable &table, const PewCodebook &codebook);

// Packages complete means into a matrix: rows sorted by country name, columns
// in question order labelled from the catalog. WVS means are normalized with
// normalize_wvs; PEW means are already on the [-1, 1] scale and only rounded.
CountryTopicMatrix build_matrix(const MeanTable &means, SurveyKind kind,
                                const TopicCatalog &catalog);

// Formula text recorded in matrix sidecars.
std::string normalization_description(SurveyKind kind);

} // namespace moralprobe::survey
