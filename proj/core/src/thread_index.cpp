#include <algorithm>
#include <fstream>

#include "firstreply/errors.hpp"
#include "firstreply/io_util.hpp"
#include "firstreply/post.hpp"
#include "firstreply/text.hpp"

namespace firstreply {

ThreadIndex build_thread_index(const std::vector<Post>& posts) {
  ThreadIndex index;
  const size_t n = posts.size();
  index.by_id.reserve(n);
  for (size_t i = 0; i < n; ++i) index.by_id.emplace(posts[i].id, i);

  index.nest_level.assign(n, -1);
  index.children.assign(n, {});
  index.thread_root.resize(n);
  index.orphan.assign(n, false);

  for (size_t i = 0; i < n; ++i) {
    index.thread_root[i] = posts[i].link_id;
    if (posts[i].parent_id) {
      auto it = index.by_id.find(*posts[i].parent_id);
      if (it != index.by_id.end()) index.children[it->second].push_back(i);
    }
  }
  for (auto& kids : index.children) {
    std::sort(kids.begin(), kids.end(), [&](size_t a, size_t b) {
      if (posts[a].created_at != posts[b].created_at)
        return posts[a].created_at < posts[b].created_at;
      return posts[a].id < posts[b].id;
    });
  }

  // Iterative parent-chain walk with cycle detection. state: -1 unvisited,
  // -2 in progress, >=0 resolved level.
  std::vector<size_t> chain;
  for (size_t i = 0; i < n; ++i) {
    if (index.nest_level[i] >= 0) continue;
    chain.clear();
    size_t cur = i;
    int base_level = -1;
    for (;;) {
      if (index.nest_level[cur] >= 0) {
        base_level = index.nest_level[cur];
        break;
      }
      if (index.nest_level[cur] == -2) {
        std::string cycle;
        for (size_t j : chain) {
          if (!cycle.empty()) cycle += " -> ";
          cycle += posts[j].id;
        }
        cycle += " -> " + posts[cur].id;
        throw DataError("parent cycle detected: " + cycle);
      }
      index.nest_level[cur] = -2;
      chain.push_back(cur);
      if (posts[cur].is_submission()) {
        index.nest_level[cur] = 0;
        base_level = 0;
        chain.pop_back();
        break;
      }
      auto it = index.by_id.find(*posts[cur].parent_id);
      if (it == index.by_id.end()) {
        // dangling parent: keep the comment at level 1
        index.nest_level[cur] = 1;
        index.orphan[cur] = true;
        base_level = 1;
        chain.pop_back();
        break;
      }
      cur = it->second;
    }
    // unwind: each chain entry is one level below its successor
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      base_level += 1;
      index.nest_level[*it] = base_level;
    }
  }
  return index;
}

bool BotFilter::is_bot(const std::string& author) const {
  std::string lower = to_lower(author);
  for (const auto& pat : substring_patterns) {
    if (lower.find(pat) != std::string::npos) return true;
  }
  for (const auto& name : blocklist) {
    if (author == name) return true;
  }
  return false;
}

namespace {
std::vector<std::string> load_list(const std::string& path) {
  std::vector<std::string> out;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open list file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(t);
  }
  return out;
}
}  // namespace

BotFilter load_bot_filter(const std::string& patterns_path,
                          const std::string& blocklist_path) {
  BotFilter f;
  f.substring_patterns = load_list(patterns_path);
  for (auto& p : f.substring_patterns) p = to_lower(p);
  f.blocklist = load_list(blocklist_path);
  return f;
}

std::vector<Post> filter_bots(std::vector<Post> posts, const BotFilter& filter) {
  std::erase_if(posts, [&](const Post& p) { return filter.is_bot(p.author); });
  return posts;
}

}  // namespace firstreply
