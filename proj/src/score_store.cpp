#include "moralprobe/csv.hpp"
#include "moralprobe/errors.hpp"
#include "moralprobe/hashing.hpp"
#include "moralprobe/model_scores.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace moralprobe::scoring {

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw NumericError("cannot format value");
    }
    return {buf, ptr};
}

namespace {

double parse_double(const std::string &field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw DataError("score cache line " + std::to_string(line) + ": bad number '" + field +
                        "'");
    }
    return v;
}

int parse_int(const std::string &field, std::size_t line) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError("score cache line " + std::to_string(line) + ": bad integer '" + field +
                        "'");
    }
    return v;
}

std::vector<std::size_t> require_columns(const csv::Table &table,
                                         const std::vector<std::string> &names,
                                         const std::string &what) {
    std::vector<std::size_t> idx;
    for (const auto &n : names) {
        const auto c = table.column(n);
        if (!c) {
            throw SchemaError(what + ": missing column " + n);
        }
        idx.push_back(*c);
    }
    return idx;
}

} // namespace

void write_score_cache(std::ostream &out, const std::vector<ScoreCacheRecord> &records) {
    csv::write_row(out, {"model_id", "country", "topic", "template_id", "pair_id", "logp_moral",
                         "logp_immoral"});
    for (const auto &r : records) {
        csv::write_row(out, {r.model_id, r.country, r.topic, r.template_id,
                             std::to_string(r.pair_id), format_double(r.logp_moral),
                             format_double(r.logp_immoral)});
    }
}

std::vector<ScoreCacheRecord> read_score_cache(std::istream &in) {
    csv::Table table{in};
    const auto idx = require_columns(table,
                                     {"model_id", "country", "topic", "template_id", "pair_id",
                                      "logp_moral", "logp_immoral"},
                                     "score cache");
    std::vector<ScoreCacheRecord> out;
    std::vector<std::string> f;
    while (table.next(f)) {
        const auto line = table.line();
        out.push_back({f[idx[0]], f[idx[1]], f[idx[2]], f[idx[3]], parse_int(f[idx[4]], line),
                       parse_double(f[idx[5]], line), parse_double(f[idx[6]], line)});
    }
    return out;
}

void add_grid_records(ScoreStore &store, const std::vector<ScoreCacheRecord> &records,
                      const PromptGrid &grid) {
    for (const auto &r : records) {
        const auto rendered =
            render_prompts(grid.vocabulary.country(r.country), grid.vocabulary.topic(r.topic),
                           grid.template_by_id(r.template_id), grid.pair_by_id(r.pair_id));
        store.insert(r.model_id, rendered.moral_text, {r.logp_moral, 0});
        store.insert(r.model_id, rendered.immoral_text, {r.logp_immoral, 0});
    }
}

std::vector<ScoreCacheRecord> grid_records_from_store(const ScoreStore &store,
                                                      const std::string &model_id,
                                                      const std::vector<std::string> &countries,
                                                      const std::vector<std::string> &topics,
                                                      const PromptGrid &grid) {
    std::vector<ScoreCacheRecord> out;
    for (const auto &country : countries) {
        for (const auto &topic : topics) {
            std::vector<ScoreCacheRecord> cell;
            bool complete = true;
            for (const auto &tmpl : grid.templates) {
                for (const auto &pair : grid.pairs) {
                    const auto rendered = render_prompts(grid.vocabulary.country(country),
                                                         grid.vocabulary.topic(topic), tmpl, pair);
                    const auto moral = store.find(model_id, rendered.moral_text);
                    const auto immoral = store.find(model_id, rendered.immoral_text);
                    if (!moral || !immoral) {
                        complete = false;
                        break;
                    }
                    cell.push_back({model_id, country, topic, tmpl.id, pair.id,
                                    moral->logprob_sum, immoral->logprob_sum});
                }
                if (!complete) {
                    break;
                }
            }
            if (complete) {
                out.insert(out.end(), cell.begin(), cell.end());
            }
        }
    }
    return out;
}

void write_text_cache(std::ostream &out, const ScoreStore &store) {
    csv::write_row(out, {"key", "model_id", "logprob_sum", "token_count", "text"});
    for (const auto &[key, e] : store.entries()) {
        csv::write_row(out, {key, e.model_id, format_double(e.score.logprob_sum),
                             std::to_string(e.score.token_count), e.text});
    }
}

void read_text_cache(std::istream &in, ScoreStore &store) {
    csv::Table table{in};
    const auto idx = require_columns(
        table, {"key", "model_id", "logprob_sum", "token_count", "text"}, "text cache");
    std::vector<std::string> f;
    while (table.next(f)) {
        const auto line = table.line();
        const auto &model_id = f[idx[1]];
        const auto &text = f[idx[4]];
        if (score_key(model_id, text) != f[idx[0]]) {
            throw DataError("text cache line " + std::to_string(line) +
                            ": key does not match model id and text");
        }
        store.insert(model_id, text,
                     {parse_double(f[idx[2]], line), parse_int(f[idx[3]], line)});
    }
}

} // namespace moralprobe::scoring
