#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace firstreply {

struct StoredScores {
  double toxicity = 0.0;
  double attack = 0.0;
  double sentiment = 0.0;
};

// Content-hash keyed score persistence: an append-only TSV of
// (sha256(text), toxicity, attack, sentiment). Posts are scored once; warm
// reruns read everything from here.
class ScoreStore {
 public:
  // Loads existing records if the file exists; appends from then on.
  explicit ScoreStore(std::string path);

  std::optional<StoredScores> lookup(const std::string& content_hash) const;
  void put(const std::string& content_hash, const StoredScores& scores);

  size_t size() const { return records_.size(); }
  const std::string& path() const { return path_; }

  static std::string hash_text(const std::string& text);

 private:
  std::string path_;
  std::map<std::string, StoredScores> records_;
  mutable std::mutex mutex_;
};

}  // namespace firstreply
