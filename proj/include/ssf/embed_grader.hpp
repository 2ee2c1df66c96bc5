#pragma once

#include <string>
#include <vector>

namespace ssf {

// Optional text-embedding grader.  POSTs {"texts": [...]} to the endpoint
// and expects {"embeddings": [[...], ...]}; evaluation falls back to
// exact/set matching when no endpoint is configured.
struct EmbedEndpointConfig {
  std::string url;          // e.g. http://host:port/embed
  std::string auth_header;  // optional "Authorization" value
  int max_in_flight = 4;
  int retries = 2;

  // Reads SSF_EMBED_ENDPOINT / SSF_EMBED_AUTH; url stays empty when unset.
  static EmbedEndpointConfig from_env();
  bool configured() const { return !url.empty(); }
};

// Fetch embeddings for a batch of texts.  Throws std::runtime_error after
// exhausting retries or on a malformed response.
std::vector<std::vector<double>> fetch_embeddings(const std::vector<std::string>& texts,
                                                  const EmbedEndpointConfig& config);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Pairwise similarity of predictions vs references via the endpoint.
std::vector<double> embedding_grade(const std::vector<std::string>& texts_pred,
                                    const std::vector<std::string>& texts_true,
                                    const EmbedEndpointConfig& config);

}  // namespace ssf
