#include "moralprobe/commands.hpp"

#include "moralprobe/analysis.hpp"
#include "moralprobe/errors.hpp"
#include "moralprobe/model_scores.hpp"
#include "moralprobe/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>

namespace moralprobe::commands {

namespace fs = std::filesystem;
using survey::SurveyKind;

namespace {

std::string safe_name(const std::string &id) {
    std::string out;
    for (char ch : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(ch)) != 0 || ch == '.' ||
                        ch == '-' || ch == '_';
        out += ok ? ch : '_';
    }
    return out.empty() ? "_" : out;
}

config::RunConfig load_config(const Options &options) {
    if (options.config_path.empty()) {
        throw ConfigError("--config is required");
    }
    return config::load(options.config_path, {options.seed, options.out});
}

std::vector<const config::DatasetConfig *> selected_datasets(const config::RunConfig &cfg,
                                                              const Options &options) {
    std::vector<const config::DatasetConfig *> out;
    if (options.dataset) {
        out.push_back(&cfg.dataset(survey::survey_kind_from_string(*options.dataset)));
        return out;
    }
    for (const auto &d : cfg.datasets) {
        out.push_back(&d);
    }
    std::sort(out.begin(), out.end(), [](const auto *a, const auto *b) { return a->kind < b->kind; });
    return out;
}

std::vector<scoring::ScorerBinding> selected_scorers(const config::RunConfig &cfg,
                                                     const Options &options) {
    if (options.model) {
        return {cfg.scorer(*options.model)};
    }
    return cfg.scorers;
}

void write_atomically(const fs::path &path, const std::string &text) {
    fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary};
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out << text;
    }
    fs::rename(tmp, path);
}

void append_run_log(const fs::path &out_dir, const std::string &command, const std::string &hash,
                    int code) {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&t, &utc);
    std::ostringstream stamp;
    stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    const nlohmann::json line = {
        {"time", stamp.str()}, {"command", command}, {"config_hash", hash}, {"exit_code", code}};
    fs::create_directories(out_dir);
    std::ofstream log{run_log_path(out_dir), std::ios::app};
    log << line.dump() << '\n';
}

int guarded(std::ostream &err, const std::function<int()> &body) {
    try {
        return body();
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(exit_code_for(e.kind()));
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    }
}

void load_store(scoring::ScoreStore &store, const fs::path &grid_cache,
                const scoring::PromptGrid &grid) {
    const auto texts = text_cache_path(grid_cache);
    if (fs::exists(texts)) {
        std::ifstream in{texts, std::ios::binary};
        scoring::read_text_cache(in, store);
    }
    if (fs::exists(grid_cache)) {
        std::ifstream in{grid_cache, std::ios::binary};
        scoring::add_grid_records(store, scoring::read_score_cache(in), grid);
    }
}

std::shared_ptr<scoring::Scorer> make_inner(const scoring::ScorerBinding &binding,
                                            const config::RunConfig &cfg,
                                            const scoring::PromptGrid &grid) {
    switch (binding.kind) {
    case scoring::ScorerKind::mock_deterministic:
        return std::make_shared<scoring::MockScorer>(binding.model_id, binding.endpoint_or_path);
    case scoring::ScorerKind::remote_http:
        return std::make_shared<scoring::RemoteScorer>(binding.endpoint_or_path,
                                                       binding.model_id, cfg.retry);
    case scoring::ScorerKind::cached_file: {
        auto store = std::make_shared<scoring::ScoreStore>();
        load_store(*store, binding.endpoint_or_path, grid);
        return std::make_shared<scoring::CachedScorer>(binding.model_id, store,
                                                       binding.endpoint_or_path);
    }
    }
    throw ConfigError("unsupported scorer kind");
}

struct LoadedDataset {
    const config::DatasetConfig *config = nullptr;
    std::string name;
    CountryTopicMatrix matrix;
};

std::vector<LoadedDataset> load_matrices(const config::RunConfig &cfg,
                                         const std::vector<const config::DatasetConfig *> &sel,
                                         bool strict) {
    std::vector<LoadedDataset> out;
    for (const auto *d : sel) {
        const auto path = matrix_path(cfg.output_dir, d->kind);
        if (!fs::exists(path)) {
            if (strict) {
                throw DataError("no empirical matrix at " + path.string() +
                                "; run `ingest` first");
            }
            continue;
        }
        out.push_back({d, survey::to_string(d->kind), load_matrix_file(path)});
    }
    return out;
}

struct Cell {
    std::size_t dataset = 0;
    std::string country;
    std::string topic;
};

} // namespace

fs::path matrix_path(const fs::path &out_dir, SurveyKind kind) {
    return out_dir / "matrices" / (survey::to_string(kind) + "_empirical.csv");
}

fs::path score_cache_path(const fs::path &out_dir, const std::string &model_id) {
    return out_dir / "cache" / (safe_name(model_id) + ".scores.csv");
}

fs::path text_cache_path(const fs::path &score_cache) {
    auto name = score_cache.filename().string();
    const std::string suffix = ".scores.csv";
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
        name.replace(name.size() - suffix.size(), suffix.size(), ".texts.csv");
    } else {
        name = score_cache.stem().string() + ".texts.csv";
    }
    return score_cache.parent_path() / name;
}

fs::path pending_path(const fs::path &score_cache) {
    auto p = score_cache;
    p.replace_extension(".pending.txt");
    return p;
}

fs::path report_dir(const fs::path &out_dir) { return out_dir / "report"; }
fs::path run_log_path(const fs::path &out_dir) { return out_dir / "run_log.jsonl"; }

int validate_config(const Options &options, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const auto cfg = load_config(options);
        config::validate(cfg, false);
        out << "config ok: " << cfg.datasets.size() << " dataset(s), " << cfg.scorers.size()
            << " scorer binding(s), hash " << config::config_hash(cfg) << '\n';
        return 0;
    });
}

int ingest(const Options &options, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const auto cfg = load_config(options);
        config::validate(cfg, false);
        for (const auto *d : selected_datasets(cfg, options)) {
            const auto name = survey::to_string(d->kind);
            if (d->csv.empty()) {
                throw ConfigError("dataset " + name + " names no csv export");
            }
            const auto catalog = config::topic_catalog(*d);
            const auto countries = survey::CountryMap::load(d->country_map);
            auto layout = survey::CsvLayout::defaults(d->kind);
            layout.delimiter = d->delimiter;
            std::ifstream in{d->csv, std::ios::binary};
            if (!in) {
                throw DataError("cannot open " + d->csv.string());
            }
            survey::MeanTable means;
            try {
                auto raw = survey::parse_survey(in, d->kind, countries, layout);
                if (d->kind == SurveyKind::wvs) {
                    survey::NonResponsePolicy policy;
                    policy.unknown_code_action = d->unknown_code_action;
                    means = survey::aggregate_means(survey::clean_nonresponses(std::move(raw), policy));
                } else {
                    survey::PewCodebook codebook;
                    codebook.nonresponse_mode = d->pew_nonresponse;
                    means = survey::aggregate_pew_means(raw, codebook);
                }
            } catch (const Error &e) {
                throw Error(e.kind(), d->csv.string() + ": " + e.what());
            }
            const auto matrix = survey::build_matrix(means, d->kind, catalog);
            const auto path = matrix_path(cfg.output_dir, d->kind);
            fs::create_directories(path.parent_path());
            write_matrix_files(path, matrix,
                               {name, matrix.rows(), matrix.cols(),
                                survey::normalization_description(d->kind),
                                matrix.provenance().describe()});
            out << name << ": " << matrix.rows() << " countries x " << matrix.cols()
                << " topics -> " << path.string() << '\n';
        }
        append_run_log(cfg.output_dir, "ingest", config::config_hash(cfg), 0);
        return 0;
    });
}

int score(const Options &options, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const auto cfg = load_config(options);
        config::validate(cfg, false);
        const auto grid = config::prompt_grid(cfg);
        const auto scorers = selected_scorers(cfg, options);
        if (scorers.empty()) {
            throw ConfigError("no scorer bindings configured");
        }
        const auto datasets = load_matrices(cfg, selected_datasets(cfg, options), true);
        // Every dataset with a matrix contributes to the written grid cache,
        // so scoring one dataset never drops records of another.
        std::vector<const config::DatasetConfig *> all;
        for (const auto &d : cfg.datasets) {
            all.push_back(&d);
        }
        const auto known = load_matrices(cfg, all, false);

        int code = 0;
        for (const auto &binding : scorers) {
            const auto cache = score_cache_path(cfg.output_dir, binding.model_id);
            auto store = std::make_shared<scoring::ScoreStore>();
            load_store(*store, cache, grid);
            auto caching = std::make_shared<scoring::CachingScorer>(
                make_inner(binding, cfg, grid), store);

            std::vector<Cell> cells;
            for (std::size_t di = 0; di < datasets.size(); ++di) {
                for (const auto &c : datasets[di].matrix.countries()) {
                    for (const auto &t : datasets[di].matrix.topics()) {
                        cells.push_back({di, c, t});
                    }
                }
            }
            std::atomic<bool> broken{false};
            std::vector<std::string> failure(cells.size());
            auto run_cell = [&](std::size_t i) {
                if (broken) {
                    failure[i] = "not attempted after transport failure";
                    return;
                }
                try {
                    (void)scoring::moral_score(cells[i].country, cells[i].topic, *caching, grid,
                                               cfg.model_scores.length_normalization);
                } catch (const TransportError &e) {
                    broken = true;
                    failure[i] = e.what();
                } catch (const Error &e) {
                    if (e.kind() != ErrorKind::scorer) {
                        throw;
                    }
                    failure[i] = e.what();
                }
            };
            const auto limit = static_cast<std::size_t>(cfg.max_in_flight);
            for (std::size_t start = 0; start < cells.size(); start += limit) {
                std::vector<std::future<void>> wave;
                for (std::size_t i = start; i < std::min(cells.size(), start + limit); ++i) {
                    wave.push_back(std::async(std::launch::async, run_cell, i));
                }
                for (auto &f : wave) {
                    f.get();
                }
            }

            std::vector<std::string> pending;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (!failure[i].empty()) {
                    pending.push_back(datasets[cells[i].dataset].name + "\t" + cells[i].country +
                                      "\t" + cells[i].topic + "\t" + failure[i]);
                }
            }
            for (const auto &d : datasets) {
                if (broken) {
                    pending.push_back(d.name + "\tprobes\t\tnot attempted after transport failure");
                    continue;
                }
                try {
                    (void)analysis::method3_probe(d.matrix, *caching, grid.vocabulary, cfg.probe);
                } catch (const TransportError &e) {
                    broken = true;
                    pending.push_back(d.name + "\tprobes\t\t" + e.what());
                } catch (const Error &e) {
                    if (e.kind() == ErrorKind::scorer) {
                        pending.push_back(d.name + "\tprobes\t\t" + e.what());
                    } else if (e.kind() != ErrorKind::domain) {
                        throw;
                    }
                }
            }

            std::vector<scoring::ScoreCacheRecord> records;
            for (const auto &d : known) {
                auto part = scoring::grid_records_from_store(
                    *store, binding.model_id, d.matrix.countries(), d.matrix.topics(), grid);
                records.insert(records.end(), part.begin(), part.end());
            }
            std::ostringstream grid_text;
            scoring::write_score_cache(grid_text, records);
            write_atomically(cache, grid_text.str());
            std::ostringstream text_text;
            scoring::write_text_cache(text_text, *store);
            write_atomically(text_cache_path(cache), text_text.str());
            const auto pend = pending_path(cache);
            if (pending.empty()) {
                fs::remove(pend);
            } else {
                std::string body = "dataset\tcountry\ttopic\treason\n";
                for (const auto &p : pending) {
                    body += p + "\n";
                }
                write_atomically(pend, body);
            }

            out << binding.model_id << ": " << records.size() << " grid records, "
                << caching->inner_texts() << " texts scored in " << caching->inner_calls()
                << " request(s), " << pending.size() << " pending -> " << cache.string() << '\n';
            if (!pending.empty()) {
                err << binding.model_id << ": " << pending.size()
                    << " item(s) pending; see " << pend.string() << '\n';
                code = static_cast<int>(ExitCode::scorer);
            }
        }
        append_run_log(cfg.output_dir, "score", config::config_hash(cfg), code);
        return code;
    });
}

int report(const Options &options, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const auto cfg = load_config(options);
        config::validate(cfg, false);
        const auto grid = config::prompt_grid(cfg);
        const auto datasets = load_matrices(cfg, selected_datasets(cfg, options), true);
        const auto scorers = selected_scorers(cfg, options);

        report::Bundle bundle;
        bundle.config_hash = config::config_hash(cfg);
        bundle.seed = cfg.seed;
        bundle.positive_class = analysis::to_string(cfg.probe.positive_class);
        bundle.settings = {
            {"rescale_mode (variances, rankings)", scoring::to_string(cfg.model_scores.rescale_mode)},
            {"rescale_mode (clustering)", scoring::to_string(scoring::RescaleMode::none)},
            {"length_normalization", scoring::to_string(cfg.model_scores.length_normalization)},
            {"variance", "population"},
            {"ami_normalization", "arithmetic mean of entropies"},
            {"kmeans_k_range", std::to_string(cfg.kmeans.k_min) + ".." +
                                   std::to_string(cfg.kmeans.k_max)},
            {"kmeans_restarts", std::to_string(cfg.kmeans.restarts)},
            {"probe_linkage", cluster::to_string(cfg.probe.linkage)},
            {"probe_clusters", std::to_string(cfg.probe.clusters)},
            {"probe_pairs_per_topic", std::to_string(cfg.probe.pairs_per_topic)},
            {"subset_size", std::to_string(cfg.subset_size)}};

        struct ModelSource {
            std::shared_ptr<scoring::ScoreStore> store;
            std::shared_ptr<scoring::Scorer> scorer;
            std::string provenance;
        };
        std::map<std::string, ModelSource> sources;
        for (const auto &b : scorers) {
            ModelSource src;
            src.store = std::make_shared<scoring::ScoreStore>();
            load_store(*src.store, score_cache_path(cfg.output_dir, b.model_id), grid);
            auto inner = make_inner(b, cfg, grid);
            src.provenance = inner->provenance();
            if (b.kind == scoring::ScorerKind::mock_deterministic) {
                src.scorer = std::make_shared<scoring::CachingScorer>(inner, src.store);
            } else {
                if (b.kind == scoring::ScorerKind::cached_file) {
                    load_store(*src.store, b.endpoint_or_path, grid);
                }
                // Reports never call a remote service; they read what `score` cached.
                src.scorer = std::make_shared<scoring::CachedScorer>(b.model_id, src.store,
                                                                     src.provenance);
            }
            sources.emplace(b.model_id, std::move(src));
        }

        for (const auto &d : datasets) {
            report::DatasetRun run;
            run.dataset = d.name;
            run.empirical = analysis::aggregate(d.matrix);
            const auto subset_size = std::min<int>(cfg.subset_size, static_cast<int>(d.matrix.cols()));
            run.controversial = analysis::rank_topics(
                d.matrix, {analysis::SubsetKind::most_controversial, subset_size});
            run.agreed =
                analysis::rank_topics(d.matrix, {analysis::SubsetKind::most_agreed, subset_size});
            run.all_topics = analysis::rank_topics(d.matrix, {analysis::SubsetKind::all, 1});

            for (const auto &b : scorers) {
                const auto &src = sources.at(b.model_id);
                auto &scorer = *src.scorer;
                report::ModelRun m;
                m.model_id = b.model_id;
                m.provenance = src.provenance;

                std::vector<std::string> covered = d.matrix.countries();
                if (b.kind != scoring::ScorerKind::mock_deterministic) {
                    const auto records = scoring::grid_records_from_store(
                        *src.store, b.model_id, d.matrix.countries(), d.matrix.topics(), grid);
                    std::map<std::string, std::size_t> cells_per_country;
                    const auto per_cell = grid.templates.size() * grid.pairs.size();
                    for (const auto &r : records) {
                        ++cells_per_country[r.country];
                    }
                    covered.clear();
                    std::size_t missing = 0;
                    for (const auto &c : d.matrix.countries()) {
                        const auto have = cells_per_country[c] / per_cell;
                        if (have == d.matrix.cols()) {
                            covered.push_back(c);
                        } else {
                            missing += d.matrix.cols() - have;
                        }
                    }
                    if (missing > 0) {
                        bundle.coverage_warnings.push_back(
                            d.name + " / " + b.model_id + ": " + std::to_string(missing) +
                            " of " + std::to_string(d.matrix.rows() * d.matrix.cols()) +
                            " cells lack cached scores; " +
                            std::to_string(d.matrix.rows() - covered.size()) +
                            " countries excluded");
                    }
                }
                if (covered.empty()) {
                    m.notes.push_back("no covered countries; model omitted");
                    run.models.push_back(std::move(m));
                    continue;
                }

                scoring::ModelScoreConfig raw_cfg = cfg.model_scores;
                raw_cfg.rescale_mode = scoring::RescaleMode::none;
                const auto raw = scoring::build_model_matrix(scorer, covered, d.matrix.topics(),
                                                             grid, raw_cfg, cfg.max_in_flight)
                                     .matrix;
                const auto shown = cfg.model_scores.rescale_mode ==
                                           scoring::RescaleMode::minmax_to_unit
                                       ? scoring::rescale_minmax(raw)
                                       : raw;

                try {
                    m.method1 = analysis::method1_variance_comparison(d.matrix, shown);
                    for (const auto &n : m.method1->notes) {
                        m.notes.push_back("method 1: " + n);
                    }
                } catch (const DomainError &e) {
                    m.notes.push_back(std::string{"method 1 skipped: "} + e.what());
                }
                m.controversial = analysis::rank_topics(
                    shown, {analysis::SubsetKind::most_controversial, subset_size});
                m.agreed =
                    analysis::rank_topics(shown, {analysis::SubsetKind::most_agreed, subset_size});
                for (auto kind : {analysis::SubsetKind::all, analysis::SubsetKind::most_controversial,
                                  analysis::SubsetKind::most_agreed}) {
                    try {
                        m.method2.emplace(kind, analysis::method2_cluster_alignment(
                                                    d.matrix, raw, {kind, subset_size}, cfg.kmeans));
                    } catch (const DomainError &e) {
                        m.notes.push_back("method 2 (" + analysis::to_string(kind) +
                                          ") skipped: " + e.what());
                    }
                }
                try {
                    m.method3 = analysis::method3_probe(d.matrix, scorer, grid.vocabulary, cfg.probe);
                    for (const auto &s : m.method3->skipped) {
                        m.notes.push_back("method 3 skipped topic " + s.topic + ": " + s.reason);
                    }
                    if (m.method3->ties > 0) {
                        m.notes.push_back("method 3: " + std::to_string(m.method3->ties) +
                                          " tied score(s) labelled different");
                    }
                } catch (const MissingScoreError &) {
                    bundle.coverage_warnings.push_back(d.name + " / " + b.model_id +
                                                       ": probe scores missing; method 3 omitted");
                } catch (const DomainError &e) {
                    m.notes.push_back(std::string{"method 3 skipped: "} + e.what());
                }
                run.models.push_back(std::move(m));
            }
            bundle.datasets.push_back(std::move(run));
        }

        const auto dir = report_dir(cfg.output_dir);
        report::write_bundle(dir, bundle);
        const int code = bundle.coverage_warnings.empty()
                             ? 0
                             : static_cast<int>(ExitCode::partial_coverage);
        for (const auto &w : bundle.coverage_warnings) {
            err << "warning: " << w << '\n';
        }
        out << "report written to " << dir.string() << " (config " << bundle.config_hash.substr(0, 12)
            << ")\n";
        append_run_log(cfg.output_dir, "report", bundle.config_hash, code);
        return code;
    });
}

} // namespace moralprobe::commands
