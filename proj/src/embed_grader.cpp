#include "ssf/embed_grader.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace ssf {

EmbedEndpointConfig EmbedEndpointConfig::from_env() {
  EmbedEndpointConfig cfg;
  if (const char* url = std::getenv("SSF_EMBED_ENDPOINT")) cfg.url = url;
  if (const char* auth = std::getenv("SSF_EMBED_AUTH")) cfg.auth_header = auth;
  return cfg;
}

namespace {

// Split "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw std::runtime_error("embed grader: malformed endpoint URL " + url);
  const std::size_t path_start = url.find('/', scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

namespace {

std::vector<std::vector<double>> fetch_batch(const std::vector<std::string>& texts,
                                             const EmbedEndpointConfig& config,
                                             const std::string& base, const std::string& path) {
  nlohmann::json body;
  body["texts"] = texts;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    httplib::Client client(base);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    httplib::Headers headers;
    if (!config.auth_header.empty()) headers.insert({"Authorization", config.auth_header});
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("embed grader: malformed JSON response: ") + e.what());
    }
    if (!parsed.contains("embeddings") || !parsed["embeddings"].is_array() ||
        parsed["embeddings"].size() != texts.size())
      throw std::runtime_error("embed grader: response lacks one embedding per text");
    std::vector<std::vector<double>> out;
    for (const auto& e : parsed["embeddings"]) out.push_back(e.get<std::vector<double>>());
    return out;
  }
  throw std::runtime_error("embed grader: " + config.url + " unreachable after " +
                           std::to_string(config.retries + 1) + " attempts: " + last_error);
}

}  // namespace

std::vector<std::vector<double>> fetch_embeddings(const std::vector<std::string>& texts,
                                                  const EmbedEndpointConfig& config) {
  if (!config.configured())
    throw std::runtime_error("embed grader: no endpoint configured (set SSF_EMBED_ENDPOINT)");
  if (texts.empty()) return {};
  const auto [base, path] = split_url(config.url);

  constexpr std::size_t kBatch = 64;
  const std::size_t n_batches = (texts.size() + kBatch - 1) / kBatch;
  std::vector<std::vector<std::vector<double>>> results(n_batches);
  std::vector<std::string> errors(n_batches);

  // Bounded number of requests in flight.
  const int workers =
      static_cast<int>(std::min<std::size_t>(std::max(config.max_in_flight, 1), n_batches));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_batches) return;
      const std::size_t lo = b * kBatch;
      const std::size_t hi = std::min(lo + kBatch, texts.size());
      try {
        results[b] = fetch_batch({texts.begin() + static_cast<long>(lo),
                                  texts.begin() + static_cast<long>(hi)},
                                 config, base, path);
      } catch (const std::exception& e) {
        errors[b] = e.what();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error(err);

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (auto& batch : results)
    for (auto& e : batch) out.push_back(std::move(e));
  return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("cosine_similarity: zero-length embedding");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> embedding_grade(const std::vector<std::string>& texts_pred,
                                    const std::vector<std::string>& texts_true,
                                    const EmbedEndpointConfig& config) {
  if (texts_pred.size() != texts_true.size())
    throw std::invalid_argument("embedding_grade: prediction/reference count mismatch");
  std::vector<std::string> all(texts_pred);
  all.insert(all.end(), texts_true.begin(), texts_true.end());
  const auto embeddings = fetch_embeddings(all, config);
  std::vector<double> sims(texts_pred.size());
  for (std::size_t i = 0; i < texts_pred.size(); ++i)
    sims[i] = cosine_similarity(embeddings[i], embeddings[i + texts_pred.size()]);
  return sims;
}

}  // namespace ssf
