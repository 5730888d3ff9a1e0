#include "moralprobe/commands.hpp"
#include "moralprobe/config.hpp"
#include "moralprobe/csv.hpp"
#include "moralprobe/report.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace moralprobe;
namespace fs = std::filesystem;

namespace {

// Thousandths from a printed three-decimal value, parsed as text.
long long thousandths(const std::string &s) {
    const bool negative = s.starts_with("-");
    const auto body = negative ? s.substr(1) : s;
    const auto dot = body.find('.');
    const long long v = std::stoll(body.substr(0, dot)) * 1000 + std::stoll(body.substr(dot + 1));
    return negative ? -v : v;
}

std::vector<std::vector<std::string>> read_csv_file(const fs::path &path) {
    std::ifstream in{path};
    csv::Reader reader{in};
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        rows.push_back(f);
    }
    return rows;
}

// Cells of a markdown table in row order, header included, separator skipped.
std::vector<std::vector<std::string>> read_markdown_table(const fs::path &path) {
    std::ifstream in{path};
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.starts_with("|") || line.starts_with("| ---")) {
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        for (std::size_t i = 1; i < line.size(); ++i) {
            if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
                cell += '|';
                ++i;
            } else if (line[i] == '|') {
                cells.push_back(cell.substr(1, cell.size() - 2));
                cell.clear();
            } else {
                cell += line[i];
            }
        }
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const std::vector<std::string> &header, const std::string &name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

const std::vector<std::string> &table_names() {
    static const std::vector<std::string> names{
        "variance_table",       "variance_gap_table",      "correlation_summary",
        "alignment_all",        "alignment_controversial", "alignment_agreed",
        "probe_confusion",      "probe_chi",               "topic_rankings",
        "probe_outcomes",       "plot_variance_long"};
    return names;
}

// Runs ingest, score and report on the mock config once for the suite.
class MockPipeline : public ::testing::Test {
  protected:
    static void SetUpTestSuite() {
        dir_ = new testsupport::TempDir;
        commands::Options o;
        o.config_path = testsupport::stage_mock_config(dir_->path());
        std::ostringstream out, err;
        ingest_code_ = commands::ingest(o, out, err);
        score_code_ = commands::score(o, out, err);
        report_code_ = commands::report(o, out, err);
        log_ = out.str() + err.str();
        hash_ = config::config_hash(config::load(o.config_path));
    }
    static void TearDownTestSuite() { delete dir_; }

    static fs::path report_dir() { return dir_->path() / "out" / "report"; }

    static testsupport::TempDir *dir_;
    static int ingest_code_, score_code_, report_code_;
    static std::string log_, hash_;
};

testsupport::TempDir *MockPipeline::dir_ = nullptr;
int MockPipeline::ingest_code_ = -1;
int MockPipeline::score_code_ = -1;
int MockPipeline::report_code_ = -1;
std::string MockPipeline::log_;
std::string MockPipeline::hash_;

} // namespace

TEST(DisplayedCas, PublishedRows) {
    EXPECT_EQ(report::displayed_cas(0.291, 0.138), 0.215);
    EXPECT_EQ(report::displayed_cas(-0.012, -0.002), -0.007);
    EXPECT_EQ(report::displayed_cas(0.4, 0.4), 0.4);
    EXPECT_EQ(report::displayed_cas(1.0, 1.0), 1.0);
}

TEST(DisplayedCas, RecomputableFromPrintedColumns) {
    std::mt19937_64 rng{1};
    std::uniform_real_distribution<double> u{-0.5, 1.0};
    for (int i = 0; i < 5000; ++i) {
        const double a = u(rng);
        const double m = u(rng);
        const auto sum = thousandths(format_fixed(a, 3)) + thousandths(format_fixed(m, 3));
        const long long half = sum >= 0 ? (sum + 1) / 2 : -((-sum + 1) / 2);
        EXPECT_EQ(thousandths(format_fixed(report::displayed_cas(a, m), 3)), half) << a << " " << m;
    }
}

TEST(ReportMarkdown, EscapesPipes) {
    const report::Table t{"t", {"a", "b"}, {{"x|y", "1.000"}}};
    const auto md = report::to_markdown(t);
    EXPECT_NE(md.find("x\\|y"), std::string::npos);
    EXPECT_EQ(report::to_csv(t), "a,b\nx|y,1.000\n");
}

TEST_F(MockPipeline, CommandsSucceed) {
    EXPECT_EQ(ingest_code_, 0) << log_;
    EXPECT_EQ(score_code_, 0) << log_;
    EXPECT_EQ(report_code_, 0) << log_;
}

TEST_F(MockPipeline, AllTablesEmittedInBothFormats) {
    for (const auto &name : table_names()) {
        EXPECT_TRUE(fs::exists(report_dir() / (name + ".csv"))) << name;
        EXPECT_TRUE(fs::exists(report_dir() / (name + ".md"))) << name;
    }
    EXPECT_TRUE(fs::exists(report_dir() / "summary.md"));
    EXPECT_TRUE(fs::exists(dir_->path() / "out" / "matrices" / "wvs_empirical.csv"));
    EXPECT_TRUE(fs::exists(dir_->path() / "out" / "matrices" / "pew_empirical.json"));
}

TEST_F(MockPipeline, CasColumnRecomputesExactlyFromEmittedColumns) {
    int rows_checked = 0;
    for (const auto *name : {"alignment_all", "alignment_controversial", "alignment_agreed"}) {
        const auto rows = read_csv_file(report_dir() / (std::string{name} + ".csv"));
        ASSERT_GE(rows.size(), 2u) << name;
        const auto &h = rows[0];
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto sum = thousandths(rows[r][column(h, "ari")]) +
                             thousandths(rows[r][column(h, "ami")]);
            const long long half = sum >= 0 ? (sum + 1) / 2 : -((-sum + 1) / 2);
            EXPECT_EQ(thousandths(rows[r][column(h, "cas")]), half) << name << " row " << r;
            ++rows_checked;
        }
    }
    // Two datasets x two models x three subsets.
    EXPECT_EQ(rows_checked, 12);
}

TEST_F(MockPipeline, MarkdownAndCsvCarryIdenticalCells) {
    for (const auto &name : table_names()) {
        const auto csv_rows = read_csv_file(report_dir() / (name + ".csv"));
        const auto md_rows = read_markdown_table(report_dir() / (name + ".md"));
        EXPECT_EQ(csv_rows, md_rows) << name;
    }
}

TEST_F(MockPipeline, EveryRowTraceableToConfigAndProvenance) {
    for (const auto &name : table_names()) {
        if (name == "plot_variance_long") {
            continue;
        }
        const auto rows = read_csv_file(report_dir() / (name + ".csv"));
        const auto &h = rows[0];
        const auto hc = column(h, "config_hash");
        const auto pc = column(h, "provenance");
        ASSERT_LT(hc, h.size()) << name;
        ASSERT_LT(pc, h.size()) << name;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            EXPECT_EQ(rows[r][hc], hash_) << name;
            EXPECT_FALSE(rows[r][pc].empty()) << name;
        }
    }
}

TEST_F(MockPipeline, ProbeChiMarginalsEqualOutcomeTotals) {
    const auto chi = read_csv_file(report_dir() / "probe_chi.csv");
    const auto outcomes = read_csv_file(report_dir() / "probe_outcomes.csv");
    const auto &ch = chi[0];
    const auto &oh = outcomes[0];
    for (std::size_t r = 1; r < chi.size(); ++r) {
        std::map<std::pair<std::string, std::string>, long long> recount;
        for (std::size_t o = 1; o < outcomes.size(); ++o) {
            if (outcomes[o][column(oh, "dataset")] == chi[r][column(ch, "dataset")] &&
                outcomes[o][column(oh, "model_id")] == chi[r][column(ch, "model_id")]) {
                ++recount[{outcomes[o][column(oh, "truth")], outcomes[o][column(oh, "predicted")]}];
            }
        }
        EXPECT_EQ(std::stoll(chi[r][column(ch, "similar_pred_similar")]),
                  (recount[{"similar", "similar"}]));
        EXPECT_EQ(std::stoll(chi[r][column(ch, "similar_pred_different")]),
                  (recount[{"similar", "different"}]));
        EXPECT_EQ(std::stoll(chi[r][column(ch, "different_pred_similar")]),
                  (recount[{"different", "similar"}]));
        EXPECT_EQ(std::stoll(chi[r][column(ch, "different_pred_different")]),
                  (recount[{"different", "different"}]));
    }
}

TEST_F(MockPipeline, ScoreCacheHasFullGrid) {
    // WVS fixture 10 x 19, PEW fixture 8 x 8; 2 templates x 5 pairs per cell.
    std::ifstream in{dir_->path() / "out" / "cache" / "mock-a.scores.csv"};
    const auto records = scoring::read_score_cache(in);
    EXPECT_EQ(records.size(), (10u * 19u + 8u * 8u) * 10u);
}

TEST(EmpiricalOnly, RankingsWithoutModelColumns) {
    testsupport::TempDir dir;
    testsupport::stage_mock_config(dir.path());
    auto doc = nlohmann::json::parse(testsupport::read_file(dir.path() / "mock_config.json"));
    doc["scorers"] = nlohmann::json::array();
    testsupport::write_file(dir.path() / "empirical.json", doc.dump(2));
    commands::Options o;
    o.config_path = dir.path() / "empirical.json";
    std::ostringstream out, err;
    ASSERT_EQ(commands::ingest(o, out, err), 0) << err.str();
    ASSERT_EQ(commands::report(o, out, err), 0) << err.str();
    const auto rankings = read_csv_file(dir.path() / "out" / "report" / "topic_rankings.csv");
    ASSERT_EQ(rankings.size(), 1u + 2u * 2u * 3u);
    for (std::size_t r = 1; r < rankings.size(); ++r) {
        EXPECT_EQ(rankings[r][1], "empirical");
    }
    EXPECT_EQ(read_csv_file(dir.path() / "out" / "report" / "alignment_all.csv").size(), 1u);
}
