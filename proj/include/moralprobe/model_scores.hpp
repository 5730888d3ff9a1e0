#pragma once

#include "moralprobe/matrix.hpp"
#include "moralprobe/prompts.hpp"
#include "moralprobe/scorers.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace moralprobe::scoring {

// Everything needed to turn (country label, topic label) into prompt texts.
struct PromptGrid {
    std::vector<PromptTemplate> templates = default_templates();
    std::vector<TokenPair> pairs = default_token_pairs();
    PromptVocabulary vocabulary;

    void validate() const;
    [[nodiscard]] const PromptTemplate &template_by_id(const std::string &id) const;
    [[nodiscard]] const TokenPair &pair_by_id(int id) const;
};

// One template x pair evaluation for a grid cell. Log-probabilities are
// natural-log sums over all tokens of each text.
struct ScoreCacheRecord {
    std::string model_id;
    std::string country;
    std::string topic;
    std::string template_id;
    int pair_id = 0;
    double logp_moral = 0.0;
    double logp_immoral = 0.0;
    bool operator==(const ScoreCacheRecord &) const = default;
};

enum class RescaleMode { none, minmax_to_unit };
enum class LengthNormalization { none, per_token_mean };

std::string to_string(RescaleMode mode);
std::string to_string(LengthNormalization mode);
RescaleMode rescale_mode_from_string(const std::string &name);
LengthNormalization length_normalization_from_string(const std::string &name);

struct ModelScoreConfig {
    RescaleMode rescale_mode = RescaleMode::minmax_to_unit;
    LengthNormalization length_normalization = LengthNormalization::none;
};

// logp_moral - logp_immoral; both must be finite.
double pair_score(double logp_moral, double logp_immoral);

// Mean pair score over every template x pair combination. The records of all
// combinations are appended to `records` when it is non-null. Scorer errors
// are re-raised with the failing combination named.
double moral_score(const std::string &country, const std::string &topic, Scorer &scorer,
                   const PromptGrid &grid,
                   LengthNormalization length_normalization = LengthNormalization::none,
                   std::vector<ScoreCacheRecord> *records = nullptr);

struct ModelMatrix {
    CountryTopicMatrix matrix;
    std::vector<ScoreCacheRecord> records; // grid order: country, topic, template, pair
};

// Scores every (country, topic) cell, with up to `max_in_flight` cells being
// scored concurrently. Reduction is deterministic regardless of concurrency.
ModelMatrix build_model_matrix(Scorer &scorer, const std::vector<std::string> &countries,
                               const std::vector<std::string> &topics, const PromptGrid &grid,
                               const ModelScoreConfig &config, int max_in_flight = 4);

// Affine map sending the matrix minimum to -1 and maximum to +1. A constant
// matrix maps to all zeros.
CountryTopicMatrix rescale_minmax(const CountryTopicMatrix &matrix);

// Grid cache file with header
// model_id,country,topic,template_id,pair_id,logp_moral,logp_immoral.
// Values are written in shortest round-trip form.
void write_score_cache(std::ostream &out, const std::vector<ScoreCacheRecord> &records);
std::vector<ScoreCacheRecord> read_score_cache(std::istream &in);

// Re-renders the texts behind grid records and adds them to a store.
void add_grid_records(ScoreStore &store, const std::vector<ScoreCacheRecord> &records,
                      const PromptGrid &grid);

// Grid records for every cell the store fully covers, in grid order.
std::vector<ScoreCacheRecord> grid_records_from_store(const ScoreStore &store,
                                                      const std::string &model_id,
                                                      const std::vector<std::string> &countries,
                                                      const std::vector<std::string> &topics,
                                                      const PromptGrid &grid);

// Text-level cache (any prompt, including comparative probes) with header
// key,model_id,logprob_sum,token_count,text.
void write_text_cache(std::ostream &out, const ScoreStore &store);
void read_text_cache(std::istream &in, ScoreStore &store);

std::string format_double(double value);

} // namespace moralprobe::scoring
