#include "moralprobe/config.hpp"

#include "moralprobe/errors.hpp"
#include "moralprobe/hashing.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace moralprobe::config {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> top_level_keys{
    "schema_version", "datasets", "scorers", "model_scores", "retry", "prompts",
    "kmeans",         "probe",    "subset_size", "output_dir", "seed"};

void reject_unknown(const json &obj, const std::set<std::string> &allowed,
                    const std::string &where) {
    for (const auto &[key, value] : obj.items()) {
        if (allowed.count(key) == 0) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
T get_or(const json &obj, const char *key, T fallback, const std::string &where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception &) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

fs::path resolve(const fs::path &base, const std::string &value) {
    if (value.empty()) {
        return {};
    }
    const fs::path p{value};
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

fs::path resource(const json &obj, const char *key, const fs::path &base,
                  const std::string &fallback_name, const std::string &where) {
    const auto value = get_or<std::string>(obj, key, "", where);
    return value.empty() ? default_data_dir() / fallback_name : resolve(base, value);
}

cluster::Backend backend_from_string(const std::string &name) {
    if (name == "serial") {
        return cluster::Backend::serial;
    }
    if (name == "openmp") {
        return cluster::Backend::openmp;
    }
    throw ConfigError("unknown kmeans backend '" + name + "'");
}

DatasetConfig parse_dataset(const std::string &name, const json &obj, const fs::path &base) {
    const std::string where = "datasets." + name;
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    reject_unknown(obj, {"csv", "country_map", "topics", "delimiter", "unknown_code_action",
                         "pew_nonresponse"},
                   where);
    DatasetConfig d;
    d.kind = survey::survey_kind_from_string(name);
    d.csv = resolve(base, get_or<std::string>(obj, "csv", "", where));
    d.country_map = resource(obj, "country_map", base, name + "_country_map.csv", where);
    d.topics = resource(obj, "topics", base, "topics_" + name + ".csv", where);
    const auto delim = get_or<std::string>(obj, "delimiter", ",", where);
    if (delim.size() != 1) {
        throw ConfigError(where + ".delimiter must be a single character");
    }
    d.delimiter = delim[0];
    const auto action = get_or<std::string>(obj, "unknown_code_action", "error", where);
    if (action == "error") {
        d.unknown_code_action = survey::NonResponsePolicy::UnknownCodeAction::error;
    } else if (action == "zero") {
        d.unknown_code_action = survey::NonResponsePolicy::UnknownCodeAction::zero;
    } else {
        throw ConfigError(where + ".unknown_code_action must be error or zero");
    }
    const auto mode = get_or<std::string>(obj, "pew_nonresponse", "zero", where);
    if (mode == "zero") {
        d.pew_nonresponse = survey::PewCodebook::NonResponseMode::zero;
    } else if (mode == "exclude") {
        d.pew_nonresponse = survey::PewCodebook::NonResponseMode::exclude;
    } else {
        throw ConfigError(where + ".pew_nonresponse must be zero or exclude");
    }
    return d;
}

} // namespace

fs::path default_data_dir() {
    if (const char *env = std::getenv("MORALPROBE_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return MORALPROBE_DEFAULT_DATA_DIR;
}

const DatasetConfig &RunConfig::dataset(survey::SurveyKind kind) const {
    for (const auto &d : datasets) {
        if (d.kind == kind) {
            return d;
        }
    }
    throw ConfigError("dataset '" + survey::to_string(kind) + "' is not configured");
}

bool RunConfig::has_dataset(survey::SurveyKind kind) const {
    for (const auto &d : datasets) {
        if (d.kind == kind) {
            return true;
        }
    }
    return false;
}

const scoring::ScorerBinding &RunConfig::scorer(const std::string &model_id) const {
    for (const auto &s : scorers) {
        if (s.model_id == model_id) {
            return s;
        }
    }
    throw ConfigError("no scorer binding for model '" + model_id + "'");
}

RunConfig parse(const json &doc, const fs::path &base_dir, const Overrides &overrides) {
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    reject_unknown(doc, top_level_keys, "config");
    const auto version = get_or<int>(doc, "schema_version", -1, "config");
    if (version != schema_version) {
        throw ConfigError("config schema_version must be " + std::to_string(schema_version) +
                          ", got " + std::to_string(version));
    }

    RunConfig c;
    c.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
    c.subset_size = get_or<int>(doc, "subset_size", 3, "config");
    if (c.subset_size < 1) {
        throw ConfigError("subset_size must be >= 1");
    }
    c.output_dir = resolve(base_dir, get_or<std::string>(doc, "output_dir", "out", "config"));

    if (doc.contains("datasets")) {
        const auto &ds = doc["datasets"];
        if (!ds.is_object()) {
            throw ConfigError("datasets must be an object keyed by wvs/pew");
        }
        for (const auto &[name, obj] : ds.items()) {
            c.datasets.push_back(parse_dataset(name, obj, base_dir));
        }
    }
    if (c.datasets.empty()) {
        throw ConfigError("config lists no datasets");
    }

    if (doc.contains("scorers")) {
        if (!doc["scorers"].is_array()) {
            throw ConfigError("scorers must be an array");
        }
        std::set<std::string> seen;
        for (const auto &s : doc["scorers"]) {
            reject_unknown(s, {"kind", "model_id", "endpoint", "path", "seed"}, "scorers[]");
            scoring::ScorerBinding b;
            b.kind = scoring::scorer_kind_from_string(
                get_or<std::string>(s, "kind", "mock_deterministic", "scorers[]"));
            b.model_id = get_or<std::string>(s, "model_id", "", "scorers[]");
            if (b.kind == scoring::ScorerKind::remote_http) {
                b.endpoint_or_path = get_or<std::string>(s, "endpoint", "", "scorers[]");
                if (const char *env = std::getenv("MORALPROBE_ENDPOINT");
                    env != nullptr && *env != '\0') {
                    b.endpoint_or_path = env;
                }
            } else if (b.kind == scoring::ScorerKind::cached_file) {
                b.endpoint_or_path =
                    resolve(base_dir, get_or<std::string>(s, "path", "", "scorers[]")).string();
            } else {
                b.endpoint_or_path = get_or<std::string>(s, "seed", "", "scorers[]");
            }
            if (!seen.insert(b.model_id).second) {
                throw ConfigError("duplicate scorer binding for model '" + b.model_id + "'");
            }
            b.validate();
            c.scorers.push_back(std::move(b));
        }
    }

    const auto ms = doc.value("model_scores", json::object());
    reject_unknown(ms, {"rescale_mode", "length_normalization", "max_in_flight"}, "model_scores");
    c.model_scores.rescale_mode = scoring::rescale_mode_from_string(
        get_or<std::string>(ms, "rescale_mode", "minmax_to_unit", "model_scores"));
    c.model_scores.length_normalization = scoring::length_normalization_from_string(
        get_or<std::string>(ms, "length_normalization", "none", "model_scores"));
    c.max_in_flight = get_or<int>(ms, "max_in_flight", 4, "model_scores");
    if (c.max_in_flight < 1) {
        throw ConfigError("model_scores.max_in_flight must be >= 1");
    }

    const auto rt = doc.value("retry", json::object());
    reject_unknown(rt, {"attempts", "initial_backoff_ms", "timeout_s"}, "retry");
    c.retry.attempts = get_or<int>(rt, "attempts", 3, "retry");
    c.retry.initial_backoff =
        std::chrono::milliseconds{get_or<int>(rt, "initial_backoff_ms", 200, "retry")};
    c.retry.timeout = std::chrono::seconds{get_or<int>(rt, "timeout_s", 120, "retry")};
    if (c.retry.attempts < 1) {
        throw ConfigError("retry.attempts must be >= 1");
    }

    const auto pr = doc.value("prompts", json::object());
    reject_unknown(pr, {"templates", "token_pairs", "country_phrases", "comparative_pairs"},
                   "prompts");
    c.templates = resource(pr, "templates", base_dir, "templates.csv", "prompts");
    c.token_pairs = resource(pr, "token_pairs", base_dir, "token_pairs.csv", "prompts");
    c.country_phrases =
        resource(pr, "country_phrases", base_dir, "country_phrases.csv", "prompts");
    c.comparative_pairs =
        resource(pr, "comparative_pairs", base_dir, "comparative_pairs.csv", "prompts");

    const auto km = doc.value("kmeans", json::object());
    reject_unknown(km, {"k_min", "k_max", "restarts", "max_iters", "tolerance", "backend"},
                   "kmeans");
    c.kmeans.k_min = get_or<int>(km, "k_min", 2, "kmeans");
    c.kmeans.k_max = get_or<int>(km, "k_max", 10, "kmeans");
    c.kmeans.restarts = get_or<int>(km, "restarts", 20, "kmeans");
    c.kmeans.max_iters = get_or<int>(km, "max_iters", 300, "kmeans");
    c.kmeans.tolerance = get_or<double>(km, "tolerance", 1e-6, "kmeans");
    c.kmeans.backend = backend_from_string(get_or<std::string>(km, "backend", "openmp", "kmeans"));

    const auto pb = doc.value("probe", json::object());
    reject_unknown(pb,
                   {"pairs_per_topic", "similar_fraction", "positive_class", "clusters", "linkage"},
                   "probe");
    c.probe.pairs_per_topic = get_or<int>(pb, "pairs_per_topic", 20, "probe");
    c.probe.similar_fraction = get_or<double>(pb, "similar_fraction", 0.5, "probe");
    c.probe.positive_class = analysis::probe_label_from_string(
        get_or<std::string>(pb, "positive_class", "similar", "probe"));
    c.probe.clusters = get_or<int>(pb, "clusters", 4, "probe");
    c.probe.linkage =
        cluster::linkage_from_string(get_or<std::string>(pb, "linkage", "average", "probe"));

    if (overrides.seed) {
        c.seed = *overrides.seed;
    }
    if (const char *env = std::getenv("MORALPROBE_OUT"); env != nullptr && *env != '\0') {
        c.output_dir = env;
    }
    if (overrides.output_dir) {
        c.output_dir = *overrides.output_dir;
    }
    c.kmeans.seed = c.seed;
    c.probe.seed = c.seed;
    c.kmeans.validate();
    c.probe.comparative_pairs = scoring::default_comparative_pairs();
    return c;
}

RunConfig load(const fs::path &path, const Overrides &overrides) {
    std::ifstream in{path};
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    auto c = parse(doc, fs::absolute(path).parent_path(), overrides);
    if (fs::exists(c.comparative_pairs)) {
        c.probe.comparative_pairs = scoring::load_comparative_pairs(c.comparative_pairs);
    }
    c.probe.validate();
    return c;
}

void validate(const RunConfig &config, bool require_raw) {
    auto need = [](const fs::path &p, const std::string &what) {
        if (p.empty() || !fs::is_regular_file(p)) {
            throw ConfigError(what + " not found: '" + p.string() + "'");
        }
    };
    for (const auto &d : config.datasets) {
        const auto name = survey::to_string(d.kind);
        if (require_raw || !d.csv.empty()) {
            need(d.csv, name + " survey export");
        }
        need(d.country_map, name + " country map");
        need(d.topics, name + " topic catalog");
        (void)topic_catalog(d);
    }
    need(config.templates, "templates");
    need(config.token_pairs, "token pairs");
    need(config.country_phrases, "country phrases");
    need(config.comparative_pairs, "comparative pairs");
    (void)scoring::load_templates(config.templates);
    (void)scoring::load_token_pairs(config.token_pairs);
    for (const auto &p : scoring::load_comparative_pairs(config.comparative_pairs)) {
        p.validate();
    }
    config.kmeans.validate();
    config.probe.validate();
    for (const auto &s : config.scorers) {
        s.validate();
    }

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    const auto probe_file = config.output_dir / ".write_probe";
    {
        std::ofstream out{probe_file};
        if (ec || !out) {
            throw ConfigError("output directory '" + config.output_dir.string() +
                              "' is not writable");
        }
    }
    fs::remove(probe_file, ec);
}

json canonical(const RunConfig &c) {
    json doc;
    doc["schema_version"] = schema_version;
    doc["seed"] = c.seed;
    doc["subset_size"] = c.subset_size;
    json ds = json::object();
    for (const auto &d : c.datasets) {
        ds[survey::to_string(d.kind)] = {
            {"csv", d.csv.filename().string()},
            {"country_map", d.country_map.filename().string()},
            {"topics", d.topics.filename().string()},
            {"delimiter", std::string(1, d.delimiter)},
            {"unknown_code_action",
             d.unknown_code_action == survey::NonResponsePolicy::UnknownCodeAction::error
                 ? "error"
                 : "zero"},
            {"pew_nonresponse",
             d.pew_nonresponse == survey::PewCodebook::NonResponseMode::zero ? "zero"
                                                                            : "exclude"}};
    }
    doc["datasets"] = ds;
    json sc = json::array();
    for (const auto &s : c.scorers) {
        json entry = {{"kind", scoring::to_string(s.kind)}, {"model_id", s.model_id}};
        if (s.kind == scoring::ScorerKind::mock_deterministic) {
            entry["seed"] = s.endpoint_or_path;
        }
        sc.push_back(entry);
    }
    doc["scorers"] = sc;
    doc["model_scores"] = {{"rescale_mode", scoring::to_string(c.model_scores.rescale_mode)},
                           {"length_normalization",
                            scoring::to_string(c.model_scores.length_normalization)}};
    doc["kmeans"] = {{"k_min", c.kmeans.k_min},
                     {"k_max", c.kmeans.k_max},
                     {"restarts", c.kmeans.restarts},
                     {"max_iters", c.kmeans.max_iters},
                     {"tolerance", c.kmeans.tolerance}};
    json cps = json::array();
    for (const auto &p : c.probe.comparative_pairs) {
        cps.push_back({p.id, p.similar, p.different});
    }
    doc["probe"] = {{"pairs_per_topic", c.probe.pairs_per_topic},
                    {"similar_fraction", c.probe.similar_fraction},
                    {"positive_class", analysis::to_string(c.probe.positive_class)},
                    {"clusters", c.probe.clusters},
                    {"linkage", cluster::to_string(c.probe.linkage)},
                    {"comparative_pairs", cps}};
    json tpl = json::array();
    for (const auto &t : scoring::load_templates(c.templates)) {
        tpl.push_back({t.id, t.pattern});
    }
    json pairs = json::array();
    for (const auto &p : scoring::load_token_pairs(c.token_pairs)) {
        pairs.push_back({p.id, p.moral, p.immoral});
    }
    doc["prompts"] = {{"templates", tpl}, {"token_pairs", pairs}};
    return doc;
}

std::string config_hash(const RunConfig &config) {
    return sha256_hex(canonical(config).dump());
}

survey::TopicCatalog topic_catalog(const DatasetConfig &dataset) {
    return survey::TopicCatalog::load(dataset.topics, dataset.kind);
}

scoring::PromptGrid prompt_grid(const RunConfig &config) {
    scoring::PromptGrid grid;
    grid.templates = scoring::load_templates(config.templates);
    grid.pairs = scoring::load_token_pairs(config.token_pairs);
    std::map<std::string, std::string> topics;
    for (const auto &d : config.datasets) {
        const auto catalog = topic_catalog(d);
        for (const auto &t : catalog.topics()) {
            topics[t.label] = t.phrase;
        }
    }
    grid.vocabulary = scoring::PromptVocabulary{
        scoring::PromptVocabulary::load_country_phrases(config.country_phrases), topics};
    grid.validate();
    return grid;
}

} // namespace moralprobe::config
