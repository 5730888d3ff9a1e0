#include "moralprobe/analysis.hpp"

#include "moralprobe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

namespace moralprobe::analysis {

namespace {

std::vector<std::string> missing_from(const std::vector<std::string> &all,
                                      const std::vector<std::string> &kept) {
    std::vector<std::string> out;
    for (const auto &name : all) {
        if (std::find(kept.begin(), kept.end(), name) == kept.end()) {
            out.push_back(name);
        }
    }
    return out;
}

void note_dropped(std::vector<std::string> &notes, const std::string &what,
                  const std::vector<std::string> &dropped) {
    if (dropped.empty()) {
        return;
    }
    std::string line = what + " dropped (not in both matrices):";
    for (const auto &d : dropped) {
        line += " " + d + ";";
    }
    line.pop_back();
    notes.push_back(line);
}

struct Aligned {
    CountryTopicMatrix emp;
    CountryTopicMatrix model;
    std::vector<std::string> notes;
};

Aligned align(const CountryTopicMatrix &emp, const CountryTopicMatrix &model) {
    const auto countries = intersect_names(emp.countries(), model.countries());
    const auto topics = intersect_names(emp.topics(), model.topics());
    Aligned out;
    note_dropped(out.notes, "survey countries", missing_from(emp.countries(), countries));
    note_dropped(out.notes, "model countries", missing_from(model.countries(), countries));
    note_dropped(out.notes, "survey topics", missing_from(emp.topics(), topics));
    note_dropped(out.notes, "model topics", missing_from(model.topics(), topics));
    if (countries.empty() || topics.empty()) {
        throw DomainError("survey and model matrices share no countries or no topics");
    }
    out.emp = emp.select(countries, topics);
    out.model = model.select(countries, topics);
    return out;
}

// Bounded uniform draw from the raw engine output, so sampling is identical
// on every standard library.
std::uint64_t draw_below(std::mt19937_64 &rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = 0;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t count,
                                          std::mt19937_64 &rng) {
    count = std::min(count, pool.size());
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + draw_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

std::mt19937_64 topic_rng(std::uint64_t seed, const std::string &topic) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                     static_cast<std::uint32_t>(seed >> 32)};
    for (unsigned char ch : topic) {
        words.push_back(ch);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64{seq};
}

using CountryPair = std::pair<std::size_t, std::size_t>;

} // namespace

AggregateSummary aggregate(const CountryTopicMatrix &matrix) {
    if (matrix.rows() == 0 || matrix.cols() == 0) {
        throw DomainError("aggregate: empty matrix");
    }
    AggregateSummary out;
    out.mean = stats::mean(matrix.scores());
    double total = 0.0;
    for (std::size_t t = 0; t < matrix.cols(); ++t) {
        total += stats::variance(matrix.column(t));
    }
    out.variance = total / static_cast<double>(matrix.cols());
    return out;
}

Method1Result method1_variance_comparison(const CountryTopicMatrix &emp,
                                          const CountryTopicMatrix &model) {
    auto aligned = align(emp, model);
    if (aligned.emp.cols() < 3) {
        throw DomainError("method 1 needs at least 3 shared topics, found " +
                          std::to_string(aligned.emp.cols()));
    }
    Method1Result out;
    out.notes = std::move(aligned.notes);
    out.countries = aligned.emp.countries();
    std::vector<double> sv;
    std::vector<double> mv;
    for (std::size_t t = 0; t < aligned.emp.cols(); ++t) {
        const auto se = aligned.emp.column(t);
        const auto sm = aligned.model.column(t);
        TopicVarianceRow row;
        row.topic = aligned.emp.topics()[t];
        row.survey_variance = stats::variance(se);
        row.survey_mean = stats::mean(se);
        row.model_variance = stats::variance(sm);
        row.model_mean = stats::mean(sm);
        row.variance_gap = std::abs(row.survey_variance - row.model_variance);
        sv.push_back(row.survey_variance);
        mv.push_back(row.model_variance);
        out.rows.push_back(std::move(row));
    }
    try {
        out.correlation = stats::pearson(sv, mv);
    } catch (const DomainError &e) {
        out.notes.push_back(std::string{"correlation undefined: "} + e.what());
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const auto &a, const auto &b) {
        return std::tie(b.variance_gap, a.topic) < std::tie(a.variance_gap, b.topic);
    });
    out.survey = aggregate(aligned.emp);
    out.model = aggregate(aligned.model);
    return out;
}

std::string to_string(SubsetKind kind) {
    switch (kind) {
    case SubsetKind::all:
        return "all";
    case SubsetKind::most_controversial:
        return "most_controversial";
    case SubsetKind::most_agreed:
        return "most_agreed";
    }
    return "all";
}

SubsetKind subset_kind_from_string(const std::string &name) {
    for (auto k : {SubsetKind::all, SubsetKind::most_controversial, SubsetKind::most_agreed}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown topic subset '" + name + "'");
}

void TopicSubset::validate(std::size_t topic_count) const {
    if (kind == SubsetKind::all) {
        return;
    }
    if (size < 1 || static_cast<std::size_t>(size) > topic_count) {
        throw DomainError("topic subset size " + std::to_string(size) + " outside [1, " +
                          std::to_string(topic_count) + "]");
    }
}

std::vector<RankedTopic> rank_topics(const CountryTopicMatrix &matrix, const TopicSubset &subset) {
    subset.validate(matrix.cols());
    std::vector<RankedTopic> ranked;
    for (std::size_t t = 0; t < matrix.cols(); ++t) {
        ranked.push_back({matrix.topics()[t], stats::variance(matrix.column(t))});
    }
    if (subset.kind == SubsetKind::most_agreed) {
        std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
            return std::tie(a.variance, a.topic) < std::tie(b.variance, b.topic);
        });
    } else {
        std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
            return std::tie(b.variance, a.topic) < std::tie(a.variance, b.topic);
        });
    }
    if (subset.kind != SubsetKind::all) {
        ranked.resize(static_cast<std::size_t>(subset.size));
    }
    return ranked;
}

Method2Result method2_cluster_alignment(const CountryTopicMatrix &emp,
                                        const CountryTopicMatrix &model,
                                        const TopicSubset &subset,
                                        const cluster::KMeansConfig &kconfig) {
    kconfig.validate();
    auto aligned = align(emp, model);
    if (aligned.emp.rows() < 4) {
        throw DomainError("method 2 needs at least 4 shared countries, found " +
                          std::to_string(aligned.emp.rows()));
    }
    Method2Result out;
    out.notes = std::move(aligned.notes);
    for (const auto &r : rank_topics(aligned.emp, subset)) {
        out.topics.push_back(r.topic);
    }
    if (subset.kind == SubsetKind::all) {
        out.topics = aligned.emp.topics();
    }
    out.countries = aligned.emp.countries();
    const auto emp_sub = aligned.emp.select_topics(out.topics);
    const auto model_sub = aligned.model.select_topics(out.topics);
    if (static_cast<std::size_t>(kconfig.k_min) > emp_sub.rows()) {
        throw DomainError("k_min " + std::to_string(kconfig.k_min) + " exceeds the " +
                          std::to_string(emp_sub.rows()) + " shared countries");
    }
    const auto emp_points = cluster::points_from_matrix(emp_sub);
    const auto model_points = cluster::points_from_matrix(model_sub);
    const auto chosen = cluster::select_k(emp_points.view(), kconfig);
    out.k = chosen.k;
    out.survey_partition = chosen.partition;
    out.model_partition = cluster::kmeans(model_points.view(), chosen.k, kconfig).partition;
    out.scores = cluster::alignment(out.survey_partition, out.model_partition);
    return out;
}

std::string to_string(ProbeLabel label) {
    return label == ProbeLabel::similar ? "similar" : "different";
}

ProbeLabel probe_label_from_string(const std::string &name) {
    if (name == "similar") {
        return ProbeLabel::similar;
    }
    if (name == "different") {
        return ProbeLabel::different;
    }
    throw ConfigError("unknown probe label '" + name + "'");
}

void ProbeConfig::validate() const {
    if (pairs_per_topic < 2) {
        throw ConfigError("probe pairs_per_topic must be at least 2");
    }
    if (!(similar_fraction > 0.0 && similar_fraction < 1.0)) {
        throw ConfigError("probe similar_fraction must lie strictly between 0 and 1");
    }
    if (comparative_pairs.empty()) {
        throw ConfigError("probe needs at least one comparative pair");
    }
    for (const auto &p : comparative_pairs) {
        p.validate();
    }
    if (clusters < 2) {
        throw ConfigError("probe clusters must be at least 2");
    }
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

ConfusionStats confusion(const ConfusionCounts &c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0) {
        throw DomainError("confusion counts must be non-negative");
    }
    const auto total = c.tp + c.fp + c.fn + c.tn;
    if (total == 0) {
        throw DomainError("confusion counts are all zero");
    }
    ConfusionStats s;
    s.counts = c;
    s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    s.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                                  : 0.0;
    s.recall =
        c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    s.f1 = f1_score(s.precision, s.recall);
    return s;
}

ConfusionCounts count_outcomes(const std::vector<ProbeOutcome> &outcomes, ProbeLabel positive) {
    ConfusionCounts c;
    for (const auto &o : outcomes) {
        const bool truth_pos = o.truth == positive;
        const bool pred_pos = o.predicted == positive;
        if (truth_pos && pred_pos) {
            ++c.tp;
        } else if (!truth_pos && pred_pos) {
            ++c.fp;
        } else if (truth_pos) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

Method3Result method3_probe(const CountryTopicMatrix &emp, scoring::Scorer &scorer,
                            const scoring::PromptVocabulary &vocabulary,
                            const ProbeConfig &config) {
    config.validate();
    Method3Result out;
    const auto n = emp.rows();
    const auto n_similar = static_cast<std::size_t>(
        std::lround(config.pairs_per_topic * config.similar_fraction));
    const auto n_different = static_cast<std::size_t>(config.pairs_per_topic) - n_similar;

    for (std::size_t t = 0; t < emp.cols(); ++t) {
        const auto &topic = emp.topics()[t];
        if (n < static_cast<std::size_t>(config.clusters)) {
            out.skipped.push_back({topic, std::to_string(n) + " countries cannot form " +
                                              std::to_string(config.clusters) + " clusters"});
            continue;
        }
        const auto column = emp.column(t);
        const cluster::PointSet points{column, n, 1};
        const auto partition = cluster::agglomerative(points.view(), config.clusters,
                                                      config.linkage, cluster::Backend::serial);

        std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(partition.k()));
        for (std::size_t i = 0; i < n; ++i) {
            members[static_cast<std::size_t>(partition.labels()[i])].push_back(i);
        }
        std::vector<double> means;
        for (const auto &m : members) {
            double s = 0.0;
            for (auto i : m) {
                s += column[i];
            }
            means.push_back(s / static_cast<double>(m.size()));
        }
        std::size_t a = 0;
        std::size_t b = 1;
        double widest = -1.0;
        for (std::size_t i = 0; i < means.size(); ++i) {
            for (std::size_t j = i + 1; j < means.size(); ++j) {
                const double gap = std::abs(means[i] - means[j]);
                if (gap > widest) {
                    widest = gap;
                    a = i;
                    b = j;
                }
            }
        }

        std::vector<CountryPair> similar_pool;
        for (auto c : {a, b}) {
            const auto &m = members[c];
            for (std::size_t i = 0; i < m.size(); ++i) {
                for (std::size_t j = i + 1; j < m.size(); ++j) {
                    similar_pool.emplace_back(m[i], m[j]);
                }
            }
        }
        if (similar_pool.empty()) {
            out.skipped.push_back({topic, "both divergent clusters are singletons; no similar "
                                          "pair can be drawn"});
            continue;
        }
        std::vector<CountryPair> different_pool;
        for (auto i : members[a]) {
            for (auto j : members[b]) {
                different_pool.emplace_back(i, j);
            }
        }

        auto rng = topic_rng(config.seed, topic);
        std::vector<std::pair<CountryPair, ProbeLabel>> sampled;
        for (const auto &p : sample_without_replacement(similar_pool, n_similar, rng)) {
            sampled.emplace_back(p, ProbeLabel::similar);
        }
        for (const auto &p : sample_without_replacement(different_pool, n_different, rng)) {
            sampled.emplace_back(p, ProbeLabel::different);
        }

        const auto topic_text = vocabulary.topic(topic);
        std::vector<std::string> texts;
        std::vector<ProbeOutcome> topic_outcomes;
        for (const auto &[pair, truth] : sampled) {
            auto x = emp.countries()[pair.first];
            auto y = emp.countries()[pair.second];
            if (y < x) {
                std::swap(x, y);
            }
            for (const auto &cp : config.comparative_pairs) {
                texts.push_back(scoring::render_probe(topic_text, vocabulary.country(x),
                                                      vocabulary.country(y), cp.similar));
                texts.push_back(scoring::render_probe(topic_text, vocabulary.country(x),
                                                      vocabulary.country(y), cp.different));
            }
            topic_outcomes.push_back({topic, x, y, truth, ProbeLabel::different, 0.0});
        }
        const auto scores = scorer.score_batch(texts);
        if (scores.size() != texts.size()) {
            throw TransportError("scorer returned the wrong number of probe scores", 1);
        }
        const auto per_pair = config.comparative_pairs.size();
        for (std::size_t o = 0; o < topic_outcomes.size(); ++o) {
            double sum = 0.0;
            for (std::size_t c = 0; c < per_pair; ++c) {
                const auto base = 2 * (o * per_pair + c);
                sum += scores[base].logprob_sum - scores[base + 1].logprob_sum;
            }
            auto &outcome = topic_outcomes[o];
            outcome.score = sum / static_cast<double>(per_pair);
            if (outcome.score > 0.0) {
                outcome.predicted = ProbeLabel::similar;
            } else if (outcome.score == 0.0) {
                ++out.ties;
            }
        }
        out.outcomes.insert(out.outcomes.end(), topic_outcomes.begin(), topic_outcomes.end());
    }

    std::sort(out.outcomes.begin(), out.outcomes.end(), [](const auto &l, const auto &r) {
        return std::tie(l.topic, l.country_x, l.country_y, l.truth) <
               std::tie(r.topic, r.country_x, r.country_y, r.truth);
    });
    if (out.outcomes.empty()) {
        throw DomainError("method 3 produced no outcomes; every topic was skipped");
    }
    out.stats = confusion(count_outcomes(out.outcomes, config.positive_class));
    for (const auto &o : out.outcomes) {
        ++out.contingency[o.truth == ProbeLabel::similar ? 0 : 1]
                         [o.predicted == ProbeLabel::similar ? 0 : 1];
    }
    try {
        out.chi = stats::chi_square_2x2(out.contingency);
    } catch (const DomainError &e) {
        out.chi_note = e.what();
    }
    return out;
}

} // namespace moralprobe::analysis
