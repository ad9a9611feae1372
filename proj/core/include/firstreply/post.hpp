#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace firstreply {

using Seconds = int64_t;

// One comment or submission. A submission roots its own thread
// (parent_id absent, link_id == id).
struct Post {
  std::string id;
  std::string author;
  std::string community;
  Seconds created_at = 0;
  std::optional<std::string> parent_id;
  std::string link_id;
  std::string body;
  std::optional<Seconds> author_created_at;

  bool is_submission() const { return !parent_id.has_value(); }
};

// Nest levels, child lists and thread roots for a post list. Index values
// refer to positions in the post vector the index was built from.
struct ThreadIndex {
  std::unordered_map<std::string, size_t> by_id;
  std::vector<int> nest_level;               // 0 for submissions, >=1 for comments
  std::vector<std::vector<size_t>> children; // sorted by (created_at, id)
  std::vector<std::string> thread_root;      // link_id of each post
  std::vector<bool> orphan;                  // comment whose parent is absent

  size_t size() const { return nest_level.size(); }
};

// Walks parent chains to assign nest levels (submission = 0, top-level
// comment = 1, ...). Orphan comments are kept at level 1 and flagged.
// Throws DataError naming the cycle if parent links loop.
ThreadIndex build_thread_index(const std::vector<Post>& posts);

struct BotFilter {
  std::vector<std::string> substring_patterns;  // matched case-insensitively
  std::vector<std::string> blocklist;           // exact author names

  bool is_bot(const std::string& author) const;
};

// Loads one-entry-per-line files; lines starting with '#' are ignored.
BotFilter load_bot_filter(const std::string& patterns_path,
                          const std::string& blocklist_path);

// Drops posts whose author matches a bot pattern or the blocklist. Removal is
// total: a bot's post is gone as both newcomer post and reply.
std::vector<Post> filter_bots(std::vector<Post> posts, const BotFilter& filter);

}  // namespace firstreply
