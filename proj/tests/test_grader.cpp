#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "ssf/embed_grader.hpp"

using namespace ssf;

namespace {

constexpr int kPort = 18931;

// Serves embeddings from a fixed per-text lookup; unknown texts get a
// deterministic hash-derived vector.
class MockServer {
 public:
  explicit MockServer(std::function<std::vector<double>(const std::string&)> embed)
      : embed_(std::move(embed)) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json out;
      out["embeddings"] = nlohmann::json::array();
      for (const auto& t : body.at("texts")) out["embeddings"].push_back(embed_(t));
      res.set_content(out.dump(), "application/json");
    });
    thread_ = std::thread([this] { server_.listen("127.0.0.1", kPort); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  std::function<std::vector<double>(const std::string&)> embed_;
};

EmbedEndpointConfig local_config() {
  EmbedEndpointConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(kPort) + "/embed";
  cfg.retries = 0;
  return cfg;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  CHECK(cosine_similarity({1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(cosine_similarity({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(cosine_similarity({1.0, 1.0}, {-1.0, -1.0}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine_similarity({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity({0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("identical strings grade at similarity 1.0") {
  MockServer server([](const std::string& text) {
    // Any deterministic embedding works: identical text => identical vector.
    std::vector<double> v(8, 0.0);
    std::size_t h = std::hash<std::string>{}(text);
    for (auto& x : v) {
      h = h * 6364136223846793005ull + 1442695040888963407ull;
      x = static_cast<double>(h % 1000) / 1000.0 + 0.001;
    }
    return v;
  });
  const auto sims = embedding_grade({"left, front, above; 2.5m", "speech"},
                                    {"left, front, above; 2.5m", "speech"}, local_config());
  REQUIRE(sims.size() == 2);
  CHECK(sims[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sims[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("orthogonal embeddings grade at 0.0") {
  MockServer server([](const std::string& text) {
    return text.size() % 2 == 0 ? std::vector<double>{1.0, 0.0}
                                : std::vector<double>{0.0, 1.0};
  });
  const auto sims = embedding_grade({"ab"}, {"abc"}, local_config());
  REQUIRE(sims.size() == 1);
  CHECK(sims[0] == doctest::Approx(0.0));
}

TEST_CASE("unreachable endpoint raises after retries") {
  EmbedEndpointConfig cfg;
  cfg.url = "http://127.0.0.1:1/embed";  // nothing listens there
  cfg.retries = 1;
  CHECK_THROWS_AS(fetch_embeddings({"x"}, cfg), std::runtime_error);
}

TEST_CASE("unconfigured endpoint is reported as such") {
  EmbedEndpointConfig cfg;
  CHECK_FALSE(cfg.configured());
  CHECK_THROWS_WITH_AS(fetch_embeddings({"x"}, cfg),
                       doctest::Contains("SSF_EMBED_ENDPOINT"), std::runtime_error);
}

TEST_CASE("malformed response is an error, not a crash") {
  httplib::Server server;
  server.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"embeddings\": [[1.0]]}", "application/json");  // wrong count for 2 texts
  });
  std::thread t([&] { server.listen("127.0.0.1", kPort + 1); });
  server.wait_until_ready();
  EmbedEndpointConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(kPort + 1) + "/embed";
  cfg.retries = 0;
  CHECK_THROWS_AS(fetch_embeddings({"a", "b"}, cfg), std::runtime_error);
  server.stop();
  t.join();
}
