#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <mutex>
#include <thread>

#include "pipeline.hpp"
#include "wmforge/error.hpp"
#include "wmforge/remote.hpp"

using namespace wmforge;

namespace {

// Local completion server; answers via `reply` and records every request body.
class StubServer {
 public:
  using Reply = std::function<void(const httplib::Request&, httplib::Response&, int call)>;

  explicit StubServer(Reply reply) : reply_(std::move(reply)) {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      int call;
      {
        std::lock_guard lock(mu_);
        bodies_.push_back(req.body);
        call = static_cast<int>(bodies_.size());
      }
      reply_(req, res, call);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions"; }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }

 private:
  httplib::Server server_;
  Reply reply_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::vector<std::string> bodies_;
};

RemoteOptions fast() {
  RemoteOptions o;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(2000);
  return o;
}

void answer(httplib::Response& res, const std::string& text) {
  res.set_content(nlohmann::json{{"choices", {{{"text", text}}}}}.dump(), "application/json");
}

}  // namespace

TEST_SUITE("remote") {
  TEST_CASE("request body carries the exact bias map") {
    StubServer stub([](const httplib::Request& req, httplib::Response& res, int) {
      const auto j = nlohmann::json::parse(req.body);
      std::string keys;
      for (const auto& [k, v] : j["logit_bias"].items()) keys += k + ",";
      answer(res, keys);
    });
    const LogitBias bias{{17, 7.0}, {4, -2.5}};
    const auto text = remote_complete(stub.url(), "hello", bias, 12, fast());
    CHECK(text == "17,4,");
    const auto body = nlohmann::json::parse(stub.bodies().at(0));
    CHECK(body["prompt"] == "hello");
    CHECK(body["max_tokens"] == 12);
    CHECK(body["logit_bias"] == nlohmann::json{{"17", 7.0}, {"4", -2.5}});
  }

  TEST_CASE("empty bias is a plain completion") {
    StubServer stub([](const httplib::Request&, httplib::Response& res, int) { answer(res, "plain text"); });
    CHECK(remote_complete(stub.url(), "p", {}, 5, fast()) == "plain text");
    CHECK(nlohmann::json::parse(stub.bodies().at(0))["logit_bias"].empty());
  }

  TEST_CASE("transient failures are retried") {
    StubServer stub([](const httplib::Request&, httplib::Response& res, int call) {
      if (call < 3) {
        res.status = 503;
        return;
      }
      answer(res, "ok");
    });
    CHECK(remote_complete(stub.url(), "p", {}, 5, fast()) == "ok");
    CHECK(stub.bodies().size() == 3);
  }

  TEST_CASE("client errors are not retried") {
    StubServer stub([](const httplib::Request&, httplib::Response& res, int) { res.status = 400; });
    try {
      remote_complete(stub.url(), "p", {}, 5, fast());
      FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
      CHECK(e.status() == 400);
      CHECK(e.attempts() == 1);
    }
  }

  TEST_CASE("unreachable endpoint fails after three attempts") {
    int port;
    {
      httplib::Server s;
      port = s.bind_to_any_port("127.0.0.1");
    }
    try {
      remote_complete("http://127.0.0.1:" + std::to_string(port) + "/v1/completions", "p", {}, 5, fast());
      FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
      CHECK(e.attempts() == 3);
      CHECK(e.status() == 0);
    }
  }

  TEST_CASE("response shapes") {
    CHECK(completion_text(R"({"choices":[{"text":"a"}]})") == "a");
    CHECK(completion_text(R"({"choices":[{"message":{"content":"b"}}]})") == "b");
    CHECK(completion_text(R"({"text":"c"})") == "c");
    CHECK_THROWS_AS(completion_text("{}"), RemoteError);
    CHECK_THROWS_AS(completion_text("not json"), RemoteError);
    CHECK_THROWS_AS(CompletionClient("localhost:80"), ConfigError);
  }

  TEST_CASE("remote robust forging biases green ids and retries misses") {
    const Vocabulary vocab(std::vector<std::string>{"<unk>", "ikun", "the", "news"});
    StubServer stub([](const httplib::Request&, httplib::Response& res, int call) {
      answer(res, call % 2 ? "the news" : "the ikun news");
    });
    cli::ForgeRequest req;
    req.cfg.mode = WatermarkMode::robust;
    req.cfg.green_tokens = {"ikun"};
    req.cfg.delta = 5.0;
    req.length = 10;
    std::vector<Record> qs{Record::output("q1", "what ?", "")};
    const auto res = cli::forge_remote_robust(qs, vocab, stub.url(), req);
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].answer == "the ikun news");
    CHECK(res.records[0].meta.attempts == 2);
    for (const auto& b : stub.bodies())
      CHECK(nlohmann::json::parse(b)["logit_bias"] == nlohmann::json{{"1", 5.0}});
  }
}
