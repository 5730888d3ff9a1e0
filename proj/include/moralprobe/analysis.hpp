#pragma once

#include "moralprobe/clustering.hpp"
#include "moralprobe/matrix.hpp"
#include "moralprobe/prompts.hpp"
#include "moralprobe/scorers.hpp"
#include "moralprobe/stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace moralprobe::analysis {

struct TopicVarianceRow {
    std::string topic;
    double survey_variance = 0.0;
    double survey_mean = 0.0;
    double model_variance = 0.0;
    double model_mean = 0.0;
    double variance_gap = 0.0; // |survey_variance - model_variance|
};

// Overall mean of all cells and mean over topics of the cross-country variance.
struct AggregateSummary {
    double mean = 0.0;
    double variance = 0.0;
};

AggregateSummary aggregate(const CountryTopicMatrix &matrix);

struct Method1Result {
    std::vector<TopicVarianceRow> rows; // variance_gap descending, then topic
    std::optional<stats::CorrelationResult> correlation; // absent when a variance vector is constant
    AggregateSummary survey;
    AggregateSummary model;
    std::vector<std::string> countries; // shared countries used
    std::vector<std::string> notes;     // dropped countries or topics
};

// Per-topic cross-country variances of both matrices over their shared
// countries and topics, and Pearson's r between the two variance vectors.
Method1Result method1_variance_comparison(const CountryTopicMatrix &emp,
                                          const CountryTopicMatrix &model);

enum class SubsetKind { all, most_controversial, most_agreed };

std::string to_string(SubsetKind kind);
SubsetKind subset_kind_from_string(const std::string &name);

struct TopicSubset {
    SubsetKind kind = SubsetKind::all;
    int size = 3;

    void validate(std::size_t topic_count) const;
};

struct RankedTopic {
    std::string topic;
    double variance = 0.0;
};

// most_controversial: highest variances first. most_agreed: lowest first.
// all: every topic, highest first. Equal variances order by label.
std::vector<RankedTopic> rank_topics(const CountryTopicMatrix &matrix, const TopicSubset &subset);

struct Method2Result {
    cluster::AlignmentScores scores;
    int k = 0;
    std::vector<std::string> topics;
    std::vector<std::string> countries;
    cluster::Partition survey_partition;
    cluster::Partition model_partition;
    std::vector<std::string> notes;
};

// Restricts both matrices to the subset topics (ranked on the survey matrix),
// picks K on the survey matrix by silhouette, clusters the model matrix with
// the same K and compares the two partitions.
Method2Result method2_cluster_alignment(const CountryTopicMatrix &emp,
                                        const CountryTopicMatrix &model,
                                        const TopicSubset &subset,
                                        const cluster::KMeansConfig &kconfig);

enum class ProbeLabel { similar, different };

std::string to_string(ProbeLabel label);
ProbeLabel probe_label_from_string(const std::string &name);

struct ProbeConfig {
    int pairs_per_topic = 20;
    double similar_fraction = 0.5;
    std::vector<scoring::ComparativePair> comparative_pairs = scoring::default_comparative_pairs();
    ProbeLabel positive_class = ProbeLabel::similar;
    std::uint64_t seed = 0;
    int clusters = 4;
    cluster::Linkage linkage = cluster::Linkage::average;

    void validate() const;
};

struct ProbeOutcome {
    std::string topic;
    std::string country_x;
    std::string country_y;
    ProbeLabel truth = ProbeLabel::similar;
    ProbeLabel predicted = ProbeLabel::different;
    double score = 0.0; // mean log-prob advantage of the "similar" word
};

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
};

struct ConfusionStats {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionCounts counts;
};

// Precision and recall are 0 when their denominator is 0; so is f1.
ConfusionStats confusion(const ConfusionCounts &counts);
double f1_score(double precision, double recall);

struct SkippedTopic {
    std::string topic;
    std::string reason;
};

struct Method3Result {
    std::vector<ProbeOutcome> outcomes; // sorted by topic, country_x, country_y
    ConfusionStats stats;
    stats::Contingency2x2 contingency{}; // rows truth, columns prediction; similar first
    std::optional<stats::ChiSquareResult> chi;
    std::string chi_note; // why chi is absent
    std::vector<SkippedTopic> skipped;
    std::size_t ties = 0; // outcomes with score exactly 0, labelled "different"
};

// Direct comparative probing over country pairs sampled from the
// hierarchical clusters of each topic's survey scores.
Method3Result method3_probe(const CountryTopicMatrix &emp, scoring::Scorer &scorer,
                            const scoring::PromptVocabulary &vocabulary,
                            const ProbeConfig &config);

// Counts of an outcome list under a positive class.
ConfusionCounts count_outcomes(const std::vector<ProbeOutcome> &outcomes, ProbeLabel positive);

} // namespace moralprobe::analysis
