#include "firstreply/remote_scorer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "firstreply/errors.hpp"
#include "firstreply/hashing.hpp"
#include "firstreply/io_util.hpp"

namespace firstreply {

using nlohmann::json;

namespace {

int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool parse_endpoint(const std::string& endpoint, std::string& host, int& port) {
  std::string rest = endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  auto colon = rest.find(':');
  if (colon == std::string::npos) {
    host = rest;
    port = 80;
    return !host.empty();
  }
  host = rest.substr(0, colon);
  auto p = parse_int(rest.substr(colon + 1));
  if (!p || *p <= 0 || *p > 65535) return false;
  port = static_cast<int>(*p);
  return !host.empty();
}

}  // namespace

RemoteScorer::RemoteScorer(RemoteScorerConfig config) : config_(std::move(config)) {
  if (!parse_endpoint(config_.endpoint, host_, port_)) {
    throw ConfigError("remote scorer: bad endpoint: " + config_.endpoint);
  }
  if (config_.rate_limit <= 0.0) throw ConfigError("remote scorer: rate_limit must be positive");
  if (!config_.cache_path.empty()) {
    std::ifstream in(config_.cache_path);
    std::string line;
    while (in && std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto fields = split(line, '\t');
      if (fields.size() != 3) continue;
      auto t = parse_double(fields[1]);
      auto a = parse_double(fields[2]);
      if (t && a) cache_[fields[0]] = {*t, *a};
    }
  }
}

RemoteScorer::~RemoteScorer() = default;

void RemoteScorer::pace() {
  int64_t min_gap_us = static_cast<int64_t>(1e6 / config_.rate_limit);
  int64_t now = now_us();
  int64_t wait = last_request_us_ + min_gap_us - now;
  if (last_request_us_ > 0 && wait > 0) {
    std::this_thread::sleep_for(std::chrono::microseconds(wait));
  }
  last_request_us_ = now_us();
}

AttributeScores RemoteScorer::request(const std::string& text) {
  json body;
  body["text"] = text;
  body["attributes"] = {"toxicity", "attack_on_commenter"};
  std::string payload = body.dump();

  double backoff_ms = config_.backoff_initial_ms;
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::microseconds(static_cast<int64_t>(backoff_ms * 1000)));
      backoff_ms *= 2.0;
    }
    pace();
    httplib::Client client(host_, port_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(10, 0);
    httplib::Headers headers;
    if (!config_.credentials.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.credentials);
    }
    ++network_calls_;
    auto res = client.Post("/score", headers, payload, "application/json");
    if (!res) {
      last_failure = "connection failure";
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw ScorerError(ScorerError::Kind::auth,
                        "scoring service rejected credentials (HTTP " +
                            std::to_string(res->status) + "); fall back to the stub scorer");
    }
    if (res->status == 429) {
      throw ScorerError(ScorerError::Kind::quota,
                        "scoring service quota exhausted (HTTP 429); fall back to the stub scorer");
    }
    if (res->status != 200) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("scores")) {
      last_failure = "unparseable response body";
      continue;
    }
    const auto& scores = parsed["scores"];
    if (!scores.contains("toxicity") || !scores.contains("attack_on_commenter")) {
      last_failure = "response missing requested attributes";
      continue;
    }
    AttributeScores out;
    out.toxicity = std::clamp(scores["toxicity"].get<double>(), 0.0, 1.0);
    out.attack = std::clamp(scores["attack_on_commenter"].get<double>(), 0.0, 1.0);
    return out;
  }
  throw ScorerError(ScorerError::Kind::transport,
                    "scoring service unreachable after " +
                        std::to_string(config_.max_attempts) + " attempts (" + last_failure + ")");
}

AttributeScores RemoteScorer::score(const std::string& text) {
  if (trim(text).empty()) return {0.0, 0.0};

  std::string key = sha256_hex(text);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  AttributeScores scores = request(text);

  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, scores);
  if (inserted && !config_.cache_path.empty()) {
    std::ofstream out(config_.cache_path, std::ios::app);
    if (out) {
      out << key << '\t' << format_double(scores.toxicity) << '\t'
          << format_double(scores.attack) << '\n';
    }
  }
  return it->second;
}

}  // namespace firstreply
