#pragma once

#include "moralprobe/analysis.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace moralprobe::report {

inline constexpr int metric_places = 3;
inline constexpr int p_value_places = 4;

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// CAS as shown in a table: the mean of the ARI and AMI exactly as printed,
// rounded half away from zero in integer units of the last place.
double displayed_cas(double ari, double ami, int places = metric_places);

struct ModelRun {
    std::string model_id;
    std::string provenance;
    std::optional<analysis::Method1Result> method1;
    std::map<analysis::SubsetKind, analysis::Method2Result> method2;
    std::optional<analysis::Method3Result> method3;
    std::vector<analysis::RankedTopic> controversial;
    std::vector<analysis::RankedTopic> agreed;
    std::vector<std::string> notes;
};

struct DatasetRun {
    std::string dataset;
    analysis::AggregateSummary empirical;
    std::vector<analysis::RankedTopic> controversial;
    std::vector<analysis::RankedTopic> agreed;
    std::vector<analysis::RankedTopic> all_topics; // every topic, variance descending
    std::vector<ModelRun> models;
};

struct Bundle {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string positive_class = "similar";
    std::vector<std::pair<std::string, std::string>> settings; // listed in summary.md
    std::vector<DatasetRun> datasets;
    std::vector<std::string> coverage_warnings;
};

// The nine report tables, in a fixed order.
std::vector<Table> build_tables(const Bundle &bundle);

// Every sampled probe pair with its score and labels.
Table probe_outcome_table(const Bundle &bundle);

// Long-format (topic, source, variance) rows for bar charts.
Table plot_table(const Bundle &bundle);

std::string to_csv(const Table &table);
std::string to_markdown(const Table &table);

// Writes <name>.csv and <name>.md for every table, the plot and outcome tables, and a
// summary.md carrying metadata and any coverage warnings. Output depends only
// on the bundle, so equal bundles give byte-identical directories.
void write_bundle(const std::filesystem::path &dir, const Bundle &bundle);

} // namespace moralprobe::report
