#pragma once

#include "moralprobe/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace moralprobe::commands {

struct Options {
    std::filesystem::path config_path;
    std::optional<std::string> model;
    std::optional<std::string> dataset;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
};

// Output layout below the configured output directory.
std::filesystem::path matrix_path(const std::filesystem::path &out_dir, survey::SurveyKind kind);
std::filesystem::path score_cache_path(const std::filesystem::path &out_dir,
                                       const std::string &model_id);
std::filesystem::path text_cache_path(const std::filesystem::path &score_cache);
std::filesystem::path pending_path(const std::filesystem::path &score_cache);
std::filesystem::path report_dir(const std::filesystem::path &out_dir);
std::filesystem::path run_log_path(const std::filesystem::path &out_dir);

// Each command returns a process exit code. Library errors are reported on
// `err` and mapped through exit_code_for.
int ingest(const Options &options, std::ostream &out, std::ostream &err);
int score(const Options &options, std::ostream &out, std::ostream &err);
int report(const Options &options, std::ostream &out, std::ostream &err);
int validate_config(const Options &options, std::ostream &out, std::ostream &err);

} // namespace moralprobe::commands
