#include "firstreply/score_store.hpp"

#include <fstream>

#include "firstreply/errors.hpp"
#include "firstreply/hashing.hpp"
#include "firstreply/io_util.hpp"

namespace firstreply {

ScoreStore::ScoreStore(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;  // fresh store
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4) throw DataError("corrupt score cache line: " + line);
    auto t = parse_double(fields[1]);
    auto a = parse_double(fields[2]);
    auto s = parse_double(fields[3]);
    if (!t || !a || !s) throw DataError("corrupt score cache line: " + line);
    records_[fields[0]] = {*t, *a, *s};
  }
}

std::optional<StoredScores> ScoreStore::lookup(const std::string& content_hash) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = records_.find(content_hash);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void ScoreStore::put(const std::string& content_hash, const StoredScores& scores) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = records_.emplace(content_hash, scores);
  if (!inserted) return;  // already persisted
  std::ofstream out(path_, std::ios::app);
  if (!out) throw DataError("cannot append to score cache: " + path_);
  out << content_hash << '\t' << format_double(scores.toxicity) << '\t'
      << format_double(scores.attack) << '\t' << format_double(scores.sentiment) << '\n';
  if (!out) throw DataError("score cache write failure: " + path_);
}

std::string ScoreStore::hash_text(const std::string& text) { return sha256_hex(text); }

}  // namespace firstreply
