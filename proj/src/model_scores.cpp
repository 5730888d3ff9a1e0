#include "moralprobe/model_scores.hpp"

#include "moralprobe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <set>

namespace moralprobe::scoring {

void PromptGrid::validate() const {
    if (templates.empty() || pairs.empty()) {
        throw ConfigError("prompt grid needs at least one template and one token pair");
    }
    std::set<std::string> template_ids;
    for (const auto &t : templates) {
        t.validate();
        if (!template_ids.insert(t.id).second) {
            throw ConfigError("duplicate template id '" + t.id + "'");
        }
    }
    std::set<int> pair_ids;
    for (const auto &p : pairs) {
        p.validate();
        if (!pair_ids.insert(p.id).second) {
            throw ConfigError("duplicate token pair id " + std::to_string(p.id));
        }
    }
}

const PromptTemplate &PromptGrid::template_by_id(const std::string &id) const {
    for (const auto &t : templates) {
        if (t.id == id) {
            return t;
        }
    }
    throw DataError("unknown template id '" + id + "'");
}

const TokenPair &PromptGrid::pair_by_id(int id) const {
    for (const auto &p : pairs) {
        if (p.id == id) {
            return p;
        }
    }
    throw DataError("unknown token pair id " + std::to_string(id));
}

std::string to_string(RescaleMode mode) {
    return mode == RescaleMode::none ? "none" : "minmax_to_unit";
}

std::string to_string(LengthNormalization mode) {
    return mode == LengthNormalization::none ? "none" : "per_token_mean";
}

RescaleMode rescale_mode_from_string(const std::string &name) {
    if (name == "none") {
        return RescaleMode::none;
    }
    if (name == "minmax_to_unit") {
        return RescaleMode::minmax_to_unit;
    }
    throw ConfigError("unknown rescale_mode '" + name + "'");
}

LengthNormalization length_normalization_from_string(const std::string &name) {
    if (name == "none") {
        return LengthNormalization::none;
    }
    if (name == "per_token_mean") {
        return LengthNormalization::per_token_mean;
    }
    throw ConfigError("unknown length_normalization '" + name + "'");
}

double pair_score(double logp_moral, double logp_immoral) {
    if (!std::isfinite(logp_moral) || !std::isfinite(logp_immoral)) {
        throw NumericError("pair_score: non-finite log-probability");
    }
    return logp_moral - logp_immoral;
}

namespace {

double normalized(const TextScore &s, LengthNormalization mode, const std::string &text) {
    if (mode == LengthNormalization::none) {
        return s.logprob_sum;
    }
    if (s.token_count <= 0) {
        throw DataError("per-token normalisation needs token counts, unavailable for \"" + text +
                        "\"");
    }
    return s.logprob_sum / s.token_count;
}

[[noreturn]] void rethrow_with_context(const std::string &context) {
    try {
        throw;
    } catch (const TransportError &e) {
        throw TransportError(context + ": " + e.what(), e.attempts());
    } catch (const Error &e) {
        throw Error(e.kind(), context + ": " + e.what());
    }
}

} // namespace

double moral_score(const std::string &country, const std::string &topic, Scorer &scorer,
                   const PromptGrid &grid, LengthNormalization length_normalization,
                   std::vector<ScoreCacheRecord> *records) {
    if (grid.templates.empty() || grid.pairs.empty()) {
        throw DomainError("moral_score: templates and pairs must be non-empty");
    }
    const std::string country_text = grid.vocabulary.country(country);
    const std::string topic_text = grid.vocabulary.topic(topic);

    std::vector<std::string> texts;
    texts.reserve(2 * grid.templates.size() * grid.pairs.size());
    for (const auto &tmpl : grid.templates) {
        for (const auto &pair : grid.pairs) {
            auto rendered = render_prompts(country_text, topic_text, tmpl, pair);
            texts.push_back(std::move(rendered.moral_text));
            texts.push_back(std::move(rendered.immoral_text));
        }
    }

    std::vector<TextScore> scores;
    try {
        scores = scorer.score_batch(texts);
    } catch (const Error &) {
        // Narrow down the failing combination by scoring one pair at a time.
        std::size_t idx = 0;
        for (const auto &tmpl : grid.templates) {
            for (const auto &pair : grid.pairs) {
                try {
                    scorer.score_batch(std::span<const std::string>{texts.data() + idx, 2});
                } catch (const Error &) {
                    rethrow_with_context("scoring (" + country + ", " + topic + ", template " +
                                         tmpl.id + ", pair " + std::to_string(pair.id) + ")");
                }
                idx += 2;
            }
        }
        rethrow_with_context("scoring (" + country + ", " + topic + ")");
    }
    if (scores.size() != texts.size()) {
        throw TransportError("scorer returned the wrong number of scores", 1);
    }

    std::vector<double> pair_scores;
    pair_scores.reserve(grid.templates.size() * grid.pairs.size());
    std::size_t idx = 0;
    for (const auto &tmpl : grid.templates) {
        for (const auto &pair : grid.pairs) {
            const auto &moral = scores[idx];
            const auto &immoral = scores[idx + 1];
            pair_scores.push_back(pair_score(normalized(moral, length_normalization, texts[idx]),
                                             normalized(immoral, length_normalization,
                                                        texts[idx + 1])));
            if (records != nullptr) {
                records->push_back({scorer.model_id(), country, topic, tmpl.id, pair.id,
                                    moral.logprob_sum, immoral.logprob_sum});
            }
            idx += 2;
        }
    }
    // Summing in sorted order makes the mean independent of template/pair order.
    std::sort(pair_scores.begin(), pair_scores.end());
    double sum = 0.0;
    for (double s : pair_scores) {
        sum += s;
    }
    return sum / static_cast<double>(pair_scores.size());
}

ModelMatrix build_model_matrix(Scorer &scorer, const std::vector<std::string> &countries,
                               const std::vector<std::string> &topics, const PromptGrid &grid,
                               const ModelScoreConfig &config, int max_in_flight) {
    if (countries.empty() || topics.empty()) {
        throw DomainError("build_model_matrix: empty grid");
    }
    grid.validate();
    const std::size_t cells = countries.size() * topics.size();
    std::vector<double> values(cells);
    std::vector<std::vector<ScoreCacheRecord>> cell_records(cells);
    std::vector<std::exception_ptr> failures(cells);

    auto run_cell = [&](std::size_t c) {
        try {
            values[c] = moral_score(countries[c / topics.size()], topics[c % topics.size()],
                                    scorer, grid, config.length_normalization, &cell_records[c]);
        } catch (...) {
            failures[c] = std::current_exception();
        }
    };

    const auto limit = static_cast<std::size_t>(std::max(1, max_in_flight));
    if (limit == 1) {
        for (std::size_t c = 0; c < cells; ++c) {
            run_cell(c);
        }
    } else {
        for (std::size_t start = 0; start < cells; start += limit) {
            std::vector<std::future<void>> wave;
            for (std::size_t c = start; c < std::min(cells, start + limit); ++c) {
                wave.push_back(std::async(std::launch::async, run_cell, c));
            }
            for (auto &f : wave) {
                f.get();
            }
        }
    }
    for (const auto &failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    ModelMatrix out;
    for (auto &r : cell_records) {
        out.records.insert(out.records.end(), std::make_move_iterator(r.begin()),
                           std::make_move_iterator(r.end()));
    }
    out.matrix = CountryTopicMatrix{countries, topics, std::move(values),
                                    Provenance::model(scorer.model_id())};
    if (config.rescale_mode == RescaleMode::minmax_to_unit) {
        out.matrix = rescale_minmax(out.matrix);
    }
    return out;
}

CountryTopicMatrix rescale_minmax(const CountryTopicMatrix &matrix) {
    const auto &s = matrix.scores();
    if (s.empty()) {
        return matrix;
    }
    const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> scaled(s.size(), 0.0);
    if (hi > lo) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            scaled[i] = s[i] == hi ? 1.0 : -1.0 + 2.0 * (s[i] - lo) / (hi - lo);
        }
    }
    return {matrix.countries(), matrix.topics(), std::move(scaled), matrix.provenance()};
}

} // namespace moralprobe::scoring
