#include "moralprobe/errors.hpp"
#include "moralprobe/survey_ingest.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace moralprobe;
using namespace moralprobe::survey;

namespace fs = std::filesystem;

namespace {

const CountryMap &countries() {
    static const CountryMap map{{{"840", "United States"}, {"392", "Japan"}, {"20", "Andorra"}}};
    return map;
}

// WVS export header with every moral question, optionally leaving one out.
std::string wvs_header(const std::string &skip = {}) {
    std::string h = "B_COUNTRY";
    for (const auto &q : question_ids(SurveyKind::wvs)) {
        if (q != skip) {
            h += "," + q;
        }
    }
    return h + "\n";
}

std::string wvs_row(const std::string &code, int first, int rest) {
    std::string r = code + "," + std::to_string(first);
    for (std::size_t i = 1; i < question_ids(SurveyKind::wvs).size(); ++i) {
        r += "," + std::to_string(rest);
    }
    return r + "\n";
}

RawSurveyTable table_of(std::vector<RawResponse> rows) {
    return {SurveyKind::wvs, std::move(rows)};
}

TopicCatalog wvs_catalog() {
    return TopicCatalog::load(fs::path{MORALPROBE_DEFAULT_DATA_DIR} / "topics_wvs.csv",
                              SurveyKind::wvs);
}

TopicCatalog pew_catalog() {
    return TopicCatalog::load(fs::path{MORALPROBE_DEFAULT_DATA_DIR} / "topics_pew.csv",
                              SurveyKind::pew);
}

} // namespace

TEST(ParseWvs, ExtractsCountryAndCode) {
    std::istringstream in{wvs_header() + wvs_row("840", 10, 5)};
    const auto t = parse_wvs(in, countries());
    ASSERT_EQ(t.rows.size(), 19u);
    EXPECT_EQ(t.rows[0], (RawResponse{"United States", "Q177", 10}));
    EXPECT_EQ(t.rows[18].topic, "Q195");
}

TEST(ParseWvs, IgnoresExtraColumnsAndLeadingZeros) {
    std::istringstream in{"EXTRA," + wvs_header() + "x,020" +
                          wvs_row("", 3, 4).substr(0)};
    const auto t = parse_wvs(in, countries());
    ASSERT_FALSE(t.rows.empty());
    EXPECT_EQ(t.rows[0].country, "Andorra");
    EXPECT_EQ(t.rows[0].code, 3);
}

TEST(ParseWvs, MissingColumnIsSchemaErrorNamingIt) {
    std::istringstream in{wvs_header("Q195") + "840,1\n"};
    try {
        parse_wvs(in, countries());
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_NE(std::string{e.what()}.find("Q195"), std::string::npos) << e.what();
    }
}

TEST(ParseWvs, UnmappedCountryIsMappingErrorNamingCode) {
    std::istringstream in{wvs_header() + wvs_row("999", 1, 1)};
    try {
        parse_wvs(in, countries());
        FAIL() << "expected MappingError";
    } catch (const MappingError &e) {
        EXPECT_NE(std::string{e.what()}.find("999"), std::string::npos) << e.what();
    }
}

TEST(ParseWvs, NonIntegerCellNamesLine) {
    std::istringstream in{wvs_header() + wvs_row("840", 1, 1) + "840,abc" +
                          wvs_row("", 1, 1).substr(2)};
    try {
        parse_wvs(in, countries());
        FAIL() << "expected DataError";
    } catch (const DataError &e) {
        EXPECT_NE(std::string{e.what()}.find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ParseWvs, SmallFixtureCoversTenCountries) {
    const auto map = CountryMap::load(fs::path{MORALPROBE_DEFAULT_DATA_DIR} / "wvs_country_map.csv");
    std::ifstream in{testsupport::fixture_dir() / "wvs_small.csv"};
    const auto t = parse_wvs(in, map);
    std::set<std::string> names;
    for (const auto &r : t.rows) {
        names.insert(r.country);
    }
    EXPECT_EQ(names.size(), 10u);
    EXPECT_EQ(t.rows.size(), 10u * 25u * 19u);
}

TEST(CleanNonresponses, Examples) {
    const auto cleaned =
        clean_nonresponses(table_of({{"A", "Q177", -2}, {"A", "Q177", 7}}), NonResponsePolicy{});
    EXPECT_EQ(cleaned.rows[0].code, 0);
    EXPECT_EQ(cleaned.rows[1].code, 7);
    EXPECT_EQ(cleaned.rows.size(), 2u);
}

TEST(CleanNonresponses, AllListedCodesBecomeZero) {
    const auto cleaned = clean_nonresponses(
        table_of({{"A", "Q177", -1}, {"A", "Q177", -2}, {"A", "Q177", -4}, {"A", "Q177", -5}}),
        NonResponsePolicy{});
    for (const auto &r : cleaned.rows) {
        EXPECT_EQ(r.code, 0);
    }
}

TEST(CleanNonresponses, UnknownNegativeCodeErrorsByDefault) {
    try {
        clean_nonresponses(table_of({{"A", "Q177", -3}}), NonResponsePolicy{});
        FAIL() << "expected DataError";
    } catch (const DataError &e) {
        EXPECT_NE(std::string{e.what()}.find("-3"), std::string::npos);
    }
}

TEST(CleanNonresponses, UnknownNegativeCodeZeroOverride) {
    NonResponsePolicy policy;
    policy.unknown_code_action = NonResponsePolicy::UnknownCodeAction::zero;
    EXPECT_EQ(clean_nonresponses(table_of({{"A", "Q177", -3}}), policy).rows[0].code, 0);
}

TEST(CleanNonresponses, PositiveZeroCodeRejected) {
    NonResponsePolicy policy;
    policy.zero_codes = {-1, 4};
    EXPECT_THROW(clean_nonresponses(table_of({}), policy), ConfigError);
}

TEST(CleanNonresponses, Idempotent) {
    const auto once = clean_nonresponses(
        table_of({{"A", "Q177", -1}, {"A", "Q178", 3}, {"B", "Q177", -5}}), NonResponsePolicy{});
    const auto twice = clean_nonresponses(once, NonResponsePolicy{});
    EXPECT_EQ(once.rows, twice.rows);
}

TEST(AggregateMeans, Examples) {
    const auto means = aggregate_means(table_of({{"A", "Q177", 10},
                                                 {"A", "Q177", 10},
                                                 {"B", "Q177", 1},
                                                 {"B", "Q177", 10},
                                                 {"C", "Q177", 0},
                                                 {"C", "Q177", 10}}));
    EXPECT_DOUBLE_EQ(means.at({"A", "Q177"}), 10.0);
    EXPECT_DOUBLE_EQ(means.at({"B", "Q177"}), 5.5);
    EXPECT_DOUBLE_EQ(means.at({"C", "Q177"}), 5.0);
}

TEST(NormalizeWvs, Examples) {
    EXPECT_EQ(normalize_wvs(5.5), 0.0);
    EXPECT_EQ(normalize_wvs(10.0), 1.0);
    EXPECT_EQ(normalize_wvs(1.0), -1.0);
    EXPECT_EQ(normalize_wvs(0.0), round4(-5.5 / 4.5)); // not clamped
    EXPECT_LT(normalize_wvs(0.0), -1.0);
    EXPECT_THROW(normalize_wvs(std::numeric_limits<double>::quiet_NaN()), NumericError);
}

TEST(NormalizeWvs, MonotoneAndOddAboutMidpoint) {
    std::mt19937_64 rng{3};
    std::uniform_real_distribution<double> u{0.0, 10.0};
    for (int i = 0; i < 2000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        if (std::fabs(a - b) > 1e-3) {
            EXPECT_EQ(normalize_wvs(a) < normalize_wvs(b), a < b) << a << " " << b;
        }
        const double x = u(rng) - 5.0;
        EXPECT_EQ(normalize_wvs(5.5 + x), -normalize_wvs(5.5 - x)) << x;
    }
}

TEST(Rounding, HalfAwayFromZeroOnDecimalForm) {
    EXPECT_EQ(round_to(0.2145, 3), 0.215);
    EXPECT_EQ(round_to(-0.2145, 3), -0.215);
    EXPECT_EQ(round_to(0.00005, 4), 0.0001);
    EXPECT_EQ(round_to(1.23444, 4), 1.2344);
    EXPECT_EQ(format_fixed(-0.00001, 4), "0.0000");
    EXPECT_EQ(format_fixed(0.5, 3), "0.500");
}

TEST(PewMapping, Codebook) {
    const PewCodebook cb;
    EXPECT_EQ(map_pew_response(1, cb), 1.0);
    EXPECT_EQ(map_pew_response(2, cb), -1.0);
    EXPECT_EQ(map_pew_response(3, cb), 0.0);
    EXPECT_EQ(map_pew_response(4, cb), 0.0);
    EXPECT_EQ(map_pew_response(8, cb), 0.0);
    EXPECT_EQ(map_pew_response(9, cb), 0.0);
    EXPECT_THROW(map_pew_response(5, cb), DataError);
}

TEST(PewMapping, ExcludeModeDropsNonresponses) {
    PewCodebook cb;
    RawSurveyTable t{SurveyKind::pew, {{"A", "Q84A", 1}, {"A", "Q84A", 9}, {"A", "Q84A", 2},
                                       {"A", "Q84A", 1}}};
    EXPECT_DOUBLE_EQ(aggregate_pew_means(t, cb).at({"A", "Q84A"}), 0.25);
    cb.nonresponse_mode = PewCodebook::NonResponseMode::exclude;
    EXPECT_DOUBLE_EQ(aggregate_pew_means(t, cb).at({"A", "Q84A"}), 1.0 / 3.0);

    RawSurveyTable only_nr{SurveyKind::pew, {{"A", "Q84A", 8}}};
    EXPECT_THROW(aggregate_pew_means(only_nr, cb), DataError);
}

TEST(BuildMatrix, SingleCellPew) {
    // A one-country PEW grid needs all eight topics; check the first cell.
    MeanTable means;
    for (const auto &q : question_ids(SurveyKind::pew)) {
        means[{"Japan", q}] = 0.25;
    }
    const auto m = build_matrix(means, SurveyKind::pew, pew_catalog());
    EXPECT_EQ(m.rows(), 1u);
    EXPECT_EQ(m.cols(), 8u);
    EXPECT_EQ(m.at(0, 0), 0.25);
    EXPECT_EQ(m.topics()[0], "Using contraceptives");
}

TEST(BuildMatrix, RowsSortedColumnsInQuestionOrder) {
    MeanTable means;
    for (const auto &c : {"Zambia", "Andorra", "Japan"}) {
        for (const auto &q : question_ids(SurveyKind::wvs)) {
            means[{c, q}] = 5.5;
        }
    }
    const auto m = build_matrix(means, SurveyKind::wvs, wvs_catalog());
    EXPECT_EQ(m.countries(), (std::vector<std::string>{"Andorra", "Japan", "Zambia"}));
    EXPECT_EQ(m.topics().front(), "Claiming government benefits to which you are not entitled");
    EXPECT_EQ(m.topics()[9], "Sex before marriage");
    EXPECT_EQ(m.provenance(), Provenance::empirical());
}

TEST(BuildMatrix, IncompleteGridListsMissingCells) {
    MeanTable means;
    for (const auto &q : question_ids(SurveyKind::wvs)) {
        means[{"A", q}] = 5.5;
        if (q != "Q190") {
            means[{"B", q}] = 5.5;
        }
    }
    try {
        build_matrix(means, SurveyKind::wvs, wvs_catalog());
        FAIL() << "expected DataError";
    } catch (const DataError &e) {
        EXPECT_NE(std::string{e.what()}.find("(B, Q190)"), std::string::npos) << e.what();
    }
}

TEST(TopicCatalog, RejectsWrongQuestionSet) {
    testsupport::TempDir dir;
    testsupport::write_file(dir.path() / "t.csv", "question,label,phrase\nQ84A,a,a\n");
    EXPECT_THROW(TopicCatalog::load(dir.path() / "t.csv", SurveyKind::pew), SchemaError);
}

TEST(SurveyProperties, RowPermutationInvariance) {
    const auto map = CountryMap::load(fs::path{MORALPROBE_DEFAULT_DATA_DIR} / "wvs_country_map.csv");
    std::ifstream in{testsupport::fixture_dir() / "wvs_small.csv"};
    auto raw = clean_nonresponses(parse_wvs(in, map), NonResponsePolicy{});
    const auto base = build_matrix(aggregate_means(raw), SurveyKind::wvs, wvs_catalog());
    std::mt19937_64 rng{17};
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(raw.rows.begin(), raw.rows.end(), rng);
        EXPECT_EQ(build_matrix(aggregate_means(raw), SurveyKind::wvs, wvs_catalog()), base);
    }
}

TEST(SurveyProperties, CellsMatchOnePassRecount) {
    // Independent recount straight from the CSV text with a streaming mean.
    const auto map = CountryMap::load(fs::path{MORALPROBE_DEFAULT_DATA_DIR} / "wvs_country_map.csv");
    std::ifstream in{testsupport::fixture_dir() / "wvs_small.csv"};
    const auto m = build_matrix(
        aggregate_means(clean_nonresponses(parse_wvs(in, map), NonResponsePolicy{})),
        SurveyKind::wvs, wvs_catalog());

    std::ifstream raw{testsupport::fixture_dir() / "wvs_small.csv"};
    std::string line;
    std::getline(raw, line);
    std::map<std::pair<std::string, int>, std::pair<double, int>> running; // (country, q) -> (mean, n)
    while (std::getline(raw, line)) {
        std::vector<std::string> f;
        std::stringstream ss{line};
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        const std::string country = *map.find(f[1]);
        for (int q = 0; q < 19; ++q) {
            int code = std::stoi(f[static_cast<std::size_t>(q) + 2]);
            if (code < 0) {
                code = 0;
            }
            auto &[mean, n] = running[{country, q}];
            ++n;
            mean += (code - mean) / n;
        }
    }
    for (const auto &[key, acc] : running) {
        const auto r = *m.country_index(key.first);
        const double expected = std::round((acc.first - 5.5) / 4.5 * 1e4) / 1e4;
        EXPECT_NEAR(m.at(r, static_cast<std::size_t>(key.second)), expected, 0.5e-4 + 1e-12)
            << key.first << " " << key.second;
    }
}

TEST(MatrixFile, RoundTripAndSidecar) {
    testsupport::TempDir dir;
    const CountryTopicMatrix m{{"A", "B"}, {"x", "y"}, {0.1234, -1.0, 0.5, 0.0},
                               Provenance::empirical()};
    write_matrix_files(dir.path() / "m.csv", m, {"wvs", 2, 2, "identity", "empirical"});
    EXPECT_EQ(testsupport::read_file(dir.path() / "m.csv"),
              "country,x,y\nA,0.1234,-1.0000\nB,0.5000,0.0000\n");
    EXPECT_TRUE(fs::exists(dir.path() / "m.json"));
    EXPECT_EQ(load_matrix_file(dir.path() / "m.csv"), m);
}
