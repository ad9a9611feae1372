#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "firstreply/attributes.hpp"

namespace firstreply {

struct RemoteScorerConfig {
  std::string endpoint;            // http://host:port
  std::string credentials;         // bearer token; usually from env
  double rate_limit = 1.0;         // requests per second
  int max_attempts = 3;            // per text, exponential backoff between
  std::string cache_path;          // optional on-disk response cache
  double backoff_initial_ms = 50;  // kept short in tests
};

// Client for the attribute scoring service. Requests are JSON documents
// {"text": ..., "attributes": [...]} answered with per-attribute summary
// probabilities. Responses are cached by sha256 of the text, so a warm re-run
// issues zero network calls. Transient failures retry with exponential
// backoff; auth/quota failures raise a typed error telling the caller the
// stub fallback applies.
class RemoteScorer final : public AttributeScorer {
 public:
  explicit RemoteScorer(RemoteScorerConfig config);
  ~RemoteScorer() override;

  AttributeScores score(const std::string& text) override;
  const char* name() const override { return "remote"; }

  uint64_t network_calls() const { return network_calls_; }

 private:
  AttributeScores request(const std::string& text);
  void pace();

  RemoteScorerConfig config_;
  std::string host_;
  int port_ = 80;
  std::map<std::string, AttributeScores> cache_;
  std::mutex mutex_;
  uint64_t network_calls_ = 0;
  int64_t last_request_us_ = 0;
};

}  // namespace firstreply
