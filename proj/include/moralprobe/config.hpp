#pragma once

#include "moralprobe/analysis.hpp"
#include "moralprobe/clustering.hpp"
#include "moralprobe/model_scores.hpp"
#include "moralprobe/scorers.hpp"
#include "moralprobe/survey_ingest.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace moralprobe::config {

inline constexpr int schema_version = 1;

struct DatasetConfig {
    survey::SurveyKind kind = survey::SurveyKind::wvs;
    std::filesystem::path csv;          // raw export
    std::filesystem::path country_map;  // code,country
    std::filesystem::path topics;       // question,label,phrase
    char delimiter = ',';
    survey::NonResponsePolicy::UnknownCodeAction unknown_code_action =
        survey::NonResponsePolicy::UnknownCodeAction::error;
    survey::PewCodebook::NonResponseMode pew_nonresponse =
        survey::PewCodebook::NonResponseMode::zero;
};

struct RunConfig {
    std::vector<DatasetConfig> datasets;
    std::vector<scoring::ScorerBinding> scorers;
    scoring::ModelScoreConfig model_scores;
    int max_in_flight = 4;
    scoring::RetryPolicy retry;
    std::filesystem::path templates;
    std::filesystem::path token_pairs;
    std::filesystem::path country_phrases;
    std::filesystem::path comparative_pairs;
    cluster::KMeansConfig kmeans;
    analysis::ProbeConfig probe;
    int subset_size = 3;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;

    [[nodiscard]] const DatasetConfig &dataset(survey::SurveyKind kind) const;
    [[nodiscard]] bool has_dataset(survey::SurveyKind kind) const;
    [[nodiscard]] const scoring::ScorerBinding &scorer(const std::string &model_id) const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

// Parses a JSON config. Relative paths resolve against `base_dir`. Missing
// prompt and topic resources fall back to the bundled data directory.
// MORALPROBE_OUT and MORALPROBE_ENDPOINT override the output directory and
// every remote endpoint; explicit overrides win over both.
RunConfig parse(const nlohmann::json &doc, const std::filesystem::path &base_dir,
                const Overrides &overrides = {});
RunConfig load(const std::filesystem::path &path, const Overrides &overrides = {});

// Checks that referenced inputs exist and the output directory is writable.
// Raw survey exports are checked when named; `require_raw` demands them.
void validate(const RunConfig &config, bool require_raw);

// Canonical JSON of the effective configuration. Paths enter by file name
// only and the output directory not at all, so relocating a run keeps its hash.
nlohmann::json canonical(const RunConfig &config);
std::string config_hash(const RunConfig &config);

std::filesystem::path default_data_dir();

// Templates, token pairs and phrases, with topic phrases of every dataset.
scoring::PromptGrid prompt_grid(const RunConfig &config);
survey::TopicCatalog topic_catalog(const DatasetConfig &dataset);

} // namespace moralprobe::config
