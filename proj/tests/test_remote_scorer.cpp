#include "moralprobe/errors.hpp"
#include "moralprobe/scorers.hpp"

#include "httplib.h"
#include "json.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

using namespace moralprobe;
using namespace moralprobe::scoring;

namespace {

// In-process stand-in for the inference service. `respond` receives the
// 1-based request number and fills the response.
class FakeService {
  public:
    using Handler = std::function<void(int, const nlohmann::json &, httplib::Response &)>;

    explicit FakeService(Handler respond) : respond_{std::move(respond)} {
        server_.Post("/v1/score", [this](const httplib::Request &req, httplib::Response &res) {
            const int n = ++requests;
            respond_(n, nlohmann::json::parse(req.body), res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread{[this] { server_.listen_after_bind(); }};
        server_.wait_until_ready();
    }
    ~FakeService() {
        server_.stop();
        thread_.join();
    }

    [[nodiscard]] std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_);
    }

    std::atomic<int> requests{0};

  private:
    httplib::Server server_;
    Handler respond_;
    int port_ = 0;
    std::thread thread_;
};

// Scores each text as minus its length, with a word count.
void ok_reply(const nlohmann::json &body, httplib::Response &res) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto &t : body.at("texts")) {
        const auto text = t.get<std::string>();
        results.push_back({{"logprob_sum", -static_cast<double>(text.size())},
                           {"token_count", 1 + std::count(text.begin(), text.end(), ' ')}});
    }
    res.set_content(nlohmann::json{{"model_id", body.at("model_id")},
                                   {"model_revision", "rev-1"},
                                   {"results", results}}
                         .dump(),
                     "application/json");
}

RetryPolicy fast_retry() {
    RetryPolicy r;
    r.attempts = 3;
    r.initial_backoff = std::chrono::milliseconds{1};
    r.timeout = std::chrono::seconds{5};
    return r;
}

} // namespace

TEST(RemoteScorer, ScoresBatchAndRecordsRevision) {
    FakeService service{[](int, const nlohmann::json &body, httplib::Response &res) {
        EXPECT_EQ(body.at("model_id"), "gpt2-medium");
        ok_reply(body, res);
    }};
    RemoteScorer scorer{service.endpoint(), "gpt2-medium", fast_retry()};
    const std::vector<std::string> texts{"In Japan divorce is right", "abc"};
    const auto out = scorer.score_batch(texts);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], (TextScore{-25.0, 5}));
    EXPECT_EQ(out[1], (TextScore{-3.0, 1}));
    EXPECT_EQ(scorer.model_revision(), "rev-1");
    EXPECT_NE(scorer.provenance().find("rev-1"), std::string::npos);
    EXPECT_EQ(service.requests, 1);
}

TEST(RemoteScorer, ServerErrorsAreRetried) {
    FakeService service{[](int n, const nlohmann::json &body, httplib::Response &res) {
        if (n < 3) {
            res.status = 500;
            res.set_content("busy", "text/plain");
            return;
        }
        ok_reply(body, res);
    }};
    RemoteScorer scorer{service.endpoint(), "m", fast_retry()};
    EXPECT_EQ(scorer.score_text("hello"), -5.0);
    EXPECT_EQ(service.requests, 3);
}

TEST(RemoteScorer, GivesUpAfterConfiguredAttempts) {
    FakeService service{[](int, const nlohmann::json &, httplib::Response &res) {
        res.status = 503;
    }};
    RemoteScorer scorer{service.endpoint(), "m", fast_retry()};
    try {
        scorer.score_text("hello");
        FAIL() << "expected TransportError";
    } catch (const TransportError &e) {
        EXPECT_EQ(e.attempts(), 3);
        EXPECT_NE(std::string{e.what()}.find("503"), std::string::npos);
    }
    EXPECT_EQ(service.requests, 3);
}

TEST(RemoteScorer, ClientErrorIsNotRetried) {
    FakeService service{[](int, const nlohmann::json &, httplib::Response &res) {
        res.status = 404;
        res.set_content(R"({"error":"unknown model","available":["gpt2-medium"]})",
                        "application/json");
    }};
    RemoteScorer scorer{service.endpoint(), "nope", fast_retry()};
    try {
        scorer.score_text("hello");
        FAIL() << "expected TransportError";
    } catch (const TransportError &e) {
        EXPECT_EQ(e.attempts(), 1);
        EXPECT_NE(std::string{e.what()}.find("unknown model"), std::string::npos);
    }
    EXPECT_EQ(service.requests, 1);
}

TEST(RemoteScorer, HonoursRetryAfter) {
    FakeService service{[](int n, const nlohmann::json &body, httplib::Response &res) {
        if (n == 1) {
            res.status = 503;
            res.set_header("Retry-After", "1");
            return;
        }
        ok_reply(body, res);
    }};
    RemoteScorer scorer{service.endpoint(), "m", fast_retry()};
    const auto start = std::chrono::steady_clock::now();
    EXPECT_EQ(scorer.score_text("ab"), -2.0);
    EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds{950});
    EXPECT_EQ(service.requests, 2);
}

TEST(RemoteScorer, MalformedReplyIsTransportError) {
    FakeService service{[](int, const nlohmann::json &, httplib::Response &res) {
        res.set_content(R"({"results":[{"nope":1}]})", "application/json");
    }};
    RemoteScorer scorer{service.endpoint(), "m", fast_retry()};
    EXPECT_THROW(scorer.score_text("x"), TransportError);
}

TEST(RemoteScorer, WrongResultCountIsTransportError) {
    FakeService service{[](int, const nlohmann::json &, httplib::Response &res) {
        res.set_content(R"({"results":[]})", "application/json");
    }};
    RemoteScorer scorer{service.endpoint(), "m", fast_retry()};
    EXPECT_THROW(scorer.score_text("x"), TransportError);
}

TEST(RemoteScorer, UnreachableEndpointIsTransportError) {
    // Port 1 is privileged and has no listener; connections are refused.
    RemoteScorer scorer{"http://127.0.0.1:1", "m", fast_retry()};
    try {
        scorer.score_text("x");
        FAIL() << "expected TransportError";
    } catch (const TransportError &e) {
        EXPECT_EQ(e.attempts(), 3);
    }
}

TEST(RemoteScorer, ConcurrentBatches) {
    FakeService service{[](int, const nlohmann::json &body, httplib::Response &res) {
        ok_reply(body, res);
    }};
    RemoteScorer scorer{service.endpoint(), "m", fast_retry()};
    std::vector<std::thread> threads;
    std::atomic<int> correct{0};
    for (int t = 0; t < 6; ++t) {
        threads.emplace_back([&, t] {
            const std::vector<std::string> texts{std::string(static_cast<std::size_t>(t + 1), 'x')};
            correct += scorer.score_batch(texts)[0].logprob_sum == -(t + 1);
        });
    }
    for (auto &th : threads) {
        th.join();
    }
    EXPECT_EQ(correct, 6);
}
