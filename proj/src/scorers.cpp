#include "moralprobe/scorers.hpp"

#include "moralprobe/errors.hpp"
#include "moralprobe/hashing.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace moralprobe::scoring {

double Scorer::score_text(const std::string &text) {
    const std::vector<std::string> one{text};
    return score_batch(one).front().logprob_sum;
}

MockScorer::MockScorer(std::string model_id, std::string seed)
    : model_id_{std::move(model_id)}, seed_{std::move(seed)} {}

std::string MockScorer::provenance() const {
    return "mock_deterministic(" + model_id_ + (seed_.empty() ? "" : ", seed=" + seed_) + ")";
}

std::vector<TextScore> MockScorer::score_batch(std::span<const std::string> texts) {
    std::vector<TextScore> out;
    out.reserve(texts.size());
    for (const auto &text : texts) {
        const std::string digest = sha256_hex(seed_ + '\0' + model_id_ + '\0' + text);
        // 52 bits of the digest give a uniform fraction in [0, 1).
        const std::uint64_t bits = std::stoull(digest.substr(0, 13), nullptr, 16);
        const double unit = static_cast<double>(bits) / static_cast<double>(1ULL << 52);
        int words = 0;
        std::istringstream ws{text};
        for (std::string w; ws >> w;) {
            ++words;
        }
        out.push_back({-5.0 - 55.0 * unit, std::max(words, 1)});
    }
    return out;
}

ScoreStore::ScoreStore(const ScoreStore &other) {
    const std::lock_guard lock{other.mutex_};
    entries_ = other.entries_;
}

ScoreStore &ScoreStore::operator=(const ScoreStore &other) {
    if (this != &other) {
        std::scoped_lock lock{mutex_, other.mutex_};
        entries_ = other.entries_;
    }
    return *this;
}

bool ScoreStore::insert(const std::string &model_id, const std::string &text, TextScore score) {
    const auto key = score_key(model_id, text);
    const std::lock_guard lock{mutex_};
    const auto [it, inserted] = entries_.try_emplace(key, Entry{model_id, text, score});
    if (!inserted) {
        auto &existing = it->second.score;
        if (existing.logprob_sum != score.logprob_sum) {
            throw DataError("score cache inconsistency for model '" + model_id + "', text \"" +
                            text + "\": recorded " + std::to_string(existing.logprob_sum) +
                            ", new " + std::to_string(score.logprob_sum));
        }
        // Token counts fill in when a later record knows them.
        if (existing.token_count == 0) {
            existing.token_count = score.token_count;
        } else if (score.token_count != 0 && score.token_count != existing.token_count) {
            throw DataError("score cache inconsistency in token count for \"" + text + "\"");
        }
    }
    return inserted;
}

std::optional<TextScore> ScoreStore::find(const std::string &model_id,
                                          const std::string &text) const {
    const auto key = score_key(model_id, text);
    const std::lock_guard lock{mutex_};
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.score;
}

std::size_t ScoreStore::size() const {
    const std::lock_guard lock{mutex_};
    return entries_.size();
}

std::vector<std::pair<std::string, ScoreStore::Entry>> ScoreStore::entries() const {
    std::vector<std::pair<std::string, Entry>> out;
    {
        const std::lock_guard lock{mutex_};
        out.assign(entries_.begin(), entries_.end());
    }
    std::sort(out.begin(), out.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    return out;
}

CachedScorer::CachedScorer(std::string model_id, std::shared_ptr<const ScoreStore> store,
                           std::string source)
    : model_id_{std::move(model_id)}, store_{std::move(store)}, source_{std::move(source)} {}

std::string CachedScorer::provenance() const {
    return "cached_file(" + model_id_ + ", " + source_ + ")";
}

std::vector<TextScore> CachedScorer::score_batch(std::span<const std::string> texts) {
    std::vector<TextScore> out;
    out.reserve(texts.size());
    for (const auto &text : texts) {
        const auto hit = store_->find(model_id_, text);
        if (!hit) {
            throw MissingScoreError("no cached score for model '" + model_id_ + "', text \"" +
                                    text + "\" (key " + score_key(model_id_, text) + ")");
        }
        out.push_back(*hit);
    }
    return out;
}

CachingScorer::CachingScorer(std::shared_ptr<Scorer> inner, std::shared_ptr<ScoreStore> store)
    : inner_{std::move(inner)}, store_{std::move(store)} {}

std::vector<TextScore> CachingScorer::score_batch(std::span<const std::string> texts) {
    std::vector<TextScore> out(texts.size());
    std::vector<std::string> misses;
    std::vector<std::size_t> miss_index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (const auto hit = store_->find(inner_->model_id(), texts[i])) {
            out[i] = *hit;
        } else {
            misses.push_back(texts[i]);
            miss_index.push_back(i);
        }
    }
    if (!misses.empty()) {
        ++inner_calls_;
        inner_texts_ += misses.size();
        const auto fresh = inner_->score_batch(misses);
        if (fresh.size() != misses.size()) {
            throw TransportError("scorer returned " + std::to_string(fresh.size()) +
                                     " scores for " + std::to_string(misses.size()) + " texts",
                                 1);
        }
        for (std::size_t m = 0; m < misses.size(); ++m) {
            store_->insert(inner_->model_id(), misses[m], fresh[m]);
            out[miss_index[m]] = fresh[m];
        }
    }
    return out;
}

RemoteScorer::RemoteScorer(std::string endpoint, std::string model_id, RetryPolicy retry)
    : endpoint_{std::move(endpoint)}, model_id_{std::move(model_id)}, retry_{retry} {
    while (!endpoint_.empty() && endpoint_.back() == '/') {
        endpoint_.pop_back();
    }
}

std::string RemoteScorer::provenance() const {
    const std::lock_guard lock{revision_mutex_};
    return "remote_http(" + model_id_ + " @ " + endpoint_ +
           (model_revision_.empty() ? "" : ", revision " + model_revision_) + ")";
}

std::vector<TextScore> RemoteScorer::score_batch(std::span<const std::string> texts) {
    if (texts.empty()) {
        return {};
    }
    nlohmann::json request = {{"model_id", model_id_},
                              {"texts", std::vector<std::string>(texts.begin(), texts.end())},
                              {"include_tokens", false}};
    const std::string body = request.dump();

    std::string last_error;
    auto backoff = retry_.initial_backoff;
    for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
        httplib::Client client{endpoint_};
        client.set_connection_timeout(retry_.timeout);
        client.set_read_timeout(retry_.timeout);
        client.set_write_timeout(retry_.timeout);
        const auto res = client.Post("/v1/score", body, "application/json");
        bool retryable = true;
        if (!res) {
            last_error = "request to " + endpoint_ + " failed: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            try {
                const auto reply = nlohmann::json::parse(res->body);
                const auto &results = reply.at("results");
                if (results.size() != texts.size()) {
                    throw TransportError("service returned " + std::to_string(results.size()) +
                                             " results for " + std::to_string(texts.size()) +
                                             " texts",
                                         attempt);
                }
                std::vector<TextScore> out;
                out.reserve(results.size());
                for (const auto &r : results) {
                    out.push_back({r.at("logprob_sum").get<double>(),
                                   r.value("token_count", 0)});
                }
                if (reply.contains("model_revision")) {
                    const std::lock_guard lock{revision_mutex_};
                    model_revision_ = reply["model_revision"].get<std::string>();
                }
                return out;
            } catch (const nlohmann::json::exception &e) {
                throw TransportError(std::string{"malformed score response: "} + e.what(),
                                     attempt);
            }
        } else {
            last_error = "HTTP " + std::to_string(res->status) + " from " + endpoint_ + ": " +
                         res->body.substr(0, 300);
            // Client errors (unknown model, bad request) will not heal on retry.
            retryable = res->status >= 500 || res->status == 429;
            if (retryable && res->has_header("Retry-After")) {
                try {
                    backoff = std::max(backoff, std::chrono::milliseconds(
                                                    1000 * std::stoi(res->get_header_value(
                                                               "Retry-After"))));
                } catch (const std::exception &) {
                }
            }
        }
        if (!retryable) {
            throw TransportError(last_error, attempt);
        }
        if (attempt < retry_.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw TransportError(last_error + " (after " + std::to_string(retry_.attempts) +
                             " attempts)",
                         retry_.attempts);
}

std::string to_string(ScorerKind kind) {
    switch (kind) {
    case ScorerKind::remote_http:
        return "remote_http";
    case ScorerKind::cached_file:
        return "cached_file";
    case ScorerKind::mock_deterministic:
        return "mock_deterministic";
    }
    return "mock_deterministic";
}

ScorerKind scorer_kind_from_string(const std::string &name) {
    if (name == "remote_http") {
        return ScorerKind::remote_http;
    }
    if (name == "cached_file") {
        return ScorerKind::cached_file;
    }
    if (name == "mock_deterministic" || name == "mock") {
        return ScorerKind::mock_deterministic;
    }
    throw ConfigError("unknown scorer kind '" + name + "'");
}

void ScorerBinding::validate() const {
    if (model_id.empty()) {
        throw ConfigError("scorer binding needs a model_id");
    }
    switch (kind) {
    case ScorerKind::remote_http:
        if (endpoint_or_path.rfind("http://", 0) != 0 &&
            endpoint_or_path.rfind("https://", 0) != 0) {
            throw ConfigError("remote_http binding for '" + model_id + "' needs an http(s) URL");
        }
        break;
    case ScorerKind::cached_file: {
        std::ifstream probe{endpoint_or_path};
        if (endpoint_or_path.empty() || !probe) {
            throw ConfigError("cached_file binding for '" + model_id +
                              "' needs a readable path, got '" + endpoint_or_path + "'");
        }
        break;
    }
    case ScorerKind::mock_deterministic:
        break;
    }
}

} // namespace moralprobe::scoring
