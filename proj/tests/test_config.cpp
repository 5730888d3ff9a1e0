#include "moralprobe/config.hpp"
#include "moralprobe/errors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace moralprobe;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal() {
    return json::parse(R"({
        "schema_version": 1,
        "seed": 5,
        "datasets": {"wvs": {"csv": "raw/wvs.csv"}},
        "scorers": [{"kind": "mock_deterministic", "model_id": "mock", "seed": "s"},
                    {"kind": "remote_http", "model_id": "gpt2-medium", "endpoint": "http://localhost:8000"}]
    })");
}

// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
  public:
    EnvGuard(const char *name, const char *value) : name_{name} { ::setenv(name, value, 1); }
    ~EnvGuard() { ::unsetenv(name_); }
    EnvGuard(const EnvGuard &) = delete;
    EnvGuard &operator=(const EnvGuard &) = delete;

  private:
    const char *name_;
};

} // namespace

TEST(Config, DefaultsAndPathResolution) {
    const auto c = config::parse(minimal(), "/base/dir");
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.kmeans.seed, 5u);
    EXPECT_EQ(c.probe.seed, 5u);
    EXPECT_EQ(c.kmeans.k_min, 2);
    EXPECT_EQ(c.kmeans.k_max, 10);
    EXPECT_EQ(c.kmeans.restarts, 20);
    EXPECT_EQ(c.probe.pairs_per_topic, 20);
    EXPECT_EQ(c.probe.clusters, 4);
    EXPECT_EQ(c.subset_size, 3);
    EXPECT_EQ(c.model_scores.rescale_mode, scoring::RescaleMode::minmax_to_unit);
    EXPECT_EQ(c.retry.attempts, 3);
    EXPECT_EQ(c.dataset(survey::SurveyKind::wvs).csv, fs::path{"/base/dir/raw/wvs.csv"});
    EXPECT_EQ(c.output_dir, fs::path{"/base/dir/out"});
    EXPECT_FALSE(c.has_dataset(survey::SurveyKind::pew));
    EXPECT_THROW((void)c.dataset(survey::SurveyKind::pew), ConfigError);
    // Missing prompt resources fall back to the bundled data directory.
    EXPECT_TRUE(fs::exists(c.templates)) << c.templates;
    EXPECT_TRUE(fs::exists(c.dataset(survey::SurveyKind::wvs).topics));
    EXPECT_EQ(c.scorer("mock").endpoint_or_path, "s");
    EXPECT_THROW((void)c.scorer("absent"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadVersion) {
    auto doc = minimal();
    doc["colour"] = "blue";
    EXPECT_THROW(config::parse(doc, "/"), ConfigError);
    doc = minimal();
    doc["kmeans"] = {{"k_maximum", 4}};
    EXPECT_THROW(config::parse(doc, "/"), ConfigError);
    doc = minimal();
    doc["schema_version"] = 2;
    EXPECT_THROW(config::parse(doc, "/"), ConfigError);
    doc = minimal();
    doc["probe"] = {{"pairs_per_topic", "many"}};
    EXPECT_THROW(config::parse(doc, "/"), ConfigError);
    doc = minimal();
    doc["scorers"].push_back({{"kind", "mock_deterministic"}, {"model_id", "mock"}});
    EXPECT_THROW(config::parse(doc, "/"), ConfigError);
}

TEST(Config, EnvironmentOverridesAndExplicitOverridesWin) {
    {
        EnvGuard out{"MORALPROBE_OUT", "/env/out"};
        EnvGuard endpoint{"MORALPROBE_ENDPOINT", "http://envhost:9000"};
        const auto c = config::parse(minimal(), "/base");
        EXPECT_EQ(c.output_dir, fs::path{"/env/out"});
        EXPECT_EQ(c.scorer("gpt2-medium").endpoint_or_path, "http://envhost:9000");
        EXPECT_EQ(c.scorer("mock").endpoint_or_path, "s");

        config::Overrides o;
        o.output_dir = "/flag/out";
        o.seed = 99;
        const auto d = config::parse(minimal(), "/base", o);
        EXPECT_EQ(d.output_dir, fs::path{"/flag/out"});
        EXPECT_EQ(d.seed, 99u);
        EXPECT_EQ(d.kmeans.seed, 99u);
    }
    EXPECT_EQ(config::parse(minimal(), "/base").output_dir, fs::path{"/base/out"});
}

TEST(Config, HashIgnoresOutputDirButTracksKnobs) {
    const auto a = config::parse(minimal(), "/one");
    config::Overrides o;
    o.output_dir = "/elsewhere";
    const auto b = config::parse(minimal(), "/two", o);
    EXPECT_EQ(config::config_hash(a), config::config_hash(b));
    EXPECT_EQ(config::config_hash(a).size(), 64u);
    EXPECT_FALSE(config::canonical(a).contains("output_dir"));

    o.seed = 6;
    EXPECT_NE(config::config_hash(config::parse(minimal(), "/one", o)), config::config_hash(a));
    auto doc = minimal();
    doc["probe"] = {{"linkage", "complete"}};
    EXPECT_NE(config::config_hash(config::parse(doc, "/one")), config::config_hash(a));
    doc = minimal();
    doc["scorers"][0]["seed"] = "other";
    EXPECT_NE(config::config_hash(config::parse(doc, "/one")), config::config_hash(a));
}

TEST(Config, LoadResolvesAgainstConfigFileAndValidates) {
    testsupport::TempDir dir;
    const auto path = testsupport::stage_mock_config(dir.path());
    const auto c = config::load(path);
    EXPECT_EQ(c.output_dir, dir.path() / "out");
    EXPECT_EQ(c.dataset(survey::SurveyKind::pew).csv, dir.path() / "pew_small.csv");
    EXPECT_EQ(c.kmeans.k_max, 6);
    EXPECT_EQ(c.scorers.size(), 2u);
    EXPECT_NO_THROW(config::validate(c, true));

    fs::remove(dir.path() / "pew_small.csv");
    EXPECT_THROW(config::validate(c, true), Error);
}

TEST(Config, MissingOrInvalidFile) {
    testsupport::TempDir dir;
    EXPECT_THROW(config::load(dir.path() / "absent.json"), ConfigError);
    testsupport::write_file(dir.path() / "bad.json", "{ not json");
    EXPECT_THROW(config::load(dir.path() / "bad.json"), ConfigError);
}

TEST(Config, PromptGridCarriesTopicPhrases) {
    testsupport::TempDir dir;
    const auto c = config::load(testsupport::stage_mock_config(dir.path()));
    const auto grid = config::prompt_grid(c);
    EXPECT_EQ(grid.templates.size(), 2u);
    EXPECT_EQ(grid.pairs.size(), 5u);
    EXPECT_EQ(grid.vocabulary.topic("Sex before marriage"), "sex before marriage");
    EXPECT_EQ(grid.vocabulary.topic("Having an abortion"), "having an abortion");
    EXPECT_EQ(grid.vocabulary.country("United States"), "the United States");
}
