#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace moralprobe::scoring {

struct TextScore {
    double logprob_sum = 0.0;
    int token_count = 0; // 0 when unknown (e.g. records loaded from a grid cache)
    bool operator==(const TextScore &) const = default;
};

// Source of total sequence log-probabilities for one model. Implementations
// must allow concurrent score_batch calls.
class Scorer {
  public:
    virtual ~Scorer() = default;

    [[nodiscard]] virtual const std::string &model_id() const = 0;
    // Short description recorded in report metadata.
    [[nodiscard]] virtual std::string provenance() const = 0;
    // False for synthetic scorers whose values are not real model output.
    [[nodiscard]] virtual bool genuine() const { return true; }

    virtual std::vector<TextScore> score_batch(std::span<const std::string> texts) = 0;

    double score_text(const std::string &text);
};

// Deterministic synthetic scorer: each text maps to a value in [-60, -5)
// derived from SHA-256 of (seed, model id, text).
class MockScorer final : public Scorer {
  public:
    explicit MockScorer(std::string model_id, std::string seed = {});

    [[nodiscard]] const std::string &model_id() const override { return model_id_; }
    [[nodiscard]] std::string provenance() const override;
    [[nodiscard]] bool genuine() const override { return false; }
    std::vector<TextScore> score_batch(std::span<const std::string> texts) override;

  private:
    std::string model_id_;
    std::string seed_;
};

// Thread-safe append-only map of text scores keyed by score_key(model, text).
// Re-inserting a key with a different value is a consistency error.
class ScoreStore {
  public:
    struct Entry {
        std::string model_id;
        std::string text;
        TextScore score;
    };

    ScoreStore() = default;
    ScoreStore(const ScoreStore &other);
    ScoreStore &operator=(const ScoreStore &other);

    // Returns true when the key was new.
    bool insert(const std::string &model_id, const std::string &text, TextScore score);
    [[nodiscard]] std::optional<TextScore> find(const std::string &model_id,
                                               const std::string &text) const;
    [[nodiscard]] std::size_t size() const;
    // Entries sorted by key.
    [[nodiscard]] std::vector<std::pair<std::string, Entry>> entries() const;

  private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Entry> entries_;
};

// Answers purely from a store; misses raise MissingScoreError.
class CachedScorer final : public Scorer {
  public:
    CachedScorer(std::string model_id, std::shared_ptr<const ScoreStore> store,
                 std::string source);

    [[nodiscard]] const std::string &model_id() const override { return model_id_; }
    [[nodiscard]] std::string provenance() const override;
    std::vector<TextScore> score_batch(std::span<const std::string> texts) override;

  private:
    std::string model_id_;
    std::shared_ptr<const ScoreStore> store_;
    std::string source_;
};

// Decorator: answers from the store where possible, forwards misses to the
// inner scorer in one batch, and records the results.
class CachingScorer final : public Scorer {
  public:
    CachingScorer(std::shared_ptr<Scorer> inner, std::shared_ptr<ScoreStore> store);

    [[nodiscard]] const std::string &model_id() const override { return inner_->model_id(); }
    [[nodiscard]] std::string provenance() const override { return inner_->provenance(); }
    [[nodiscard]] bool genuine() const override { return inner_->genuine(); }
    std::vector<TextScore> score_batch(std::span<const std::string> texts) override;

    // Number of batches and texts forwarded to the inner scorer.
    [[nodiscard]] std::size_t inner_calls() const noexcept { return inner_calls_; }
    [[nodiscard]] std::size_t inner_texts() const noexcept { return inner_texts_; }

  private:
    std::shared_ptr<Scorer> inner_;
    std::shared_ptr<ScoreStore> store_;
    std::atomic<std::size_t> inner_calls_{0};
    std::atomic<std::size_t> inner_texts_{0};
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds timeout{120};
};

// Client of the inference service's POST /v1/score endpoint.
class RemoteScorer final : public Scorer {
  public:
    RemoteScorer(std::string endpoint, std::string model_id, RetryPolicy retry = {});

    [[nodiscard]] const std::string &model_id() const override { return model_id_; }
    [[nodiscard]] std::string provenance() const override;
    std::vector<TextScore> score_batch(std::span<const std::string> texts) override;

    [[nodiscard]] const std::string &model_revision() const { return model_revision_; }

  private:
    std::string endpoint_;
    std::string model_id_;
    RetryPolicy retry_;
    mutable std::mutex revision_mutex_;
    std::string model_revision_;
};

enum class ScorerKind { remote_http, cached_file, mock_deterministic };

std::string to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(const std::string &name);

struct ScorerBinding {
    ScorerKind kind = ScorerKind::mock_deterministic;
    std::string endpoint_or_path;
    std::string model_id;

    // remote_http needs an http(s) URL; cached_file an existing readable path.
    void validate() const;
};

} // namespace moralprobe::scoring
