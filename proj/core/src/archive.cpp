#include "firstreply/archive.hpp"

#include <fstream>

#include <json.hpp>

#include "firstreply/errors.hpp"
#include "firstreply/io_util.hpp"

namespace firstreply {

using nlohmann::json;

namespace {

// created_utc appears both as number and as decimal string in the wild.
bool read_epoch(const json& j, const char* key, Seconds& out) {
  auto it = j.find(key);
  if (it == j.end()) return false;
  if (it->is_number_integer()) {
    out = it->get<int64_t>();
    return true;
  }
  if (it->is_number_float()) {
    out = static_cast<Seconds>(it->get<double>());
    return true;
  }
  if (it->is_string()) {
    auto v = parse_int(it->get<std::string>());
    if (!v) return false;
    out = *v;
    return true;
  }
  return false;
}

bool read_string(const json& j, const char* key, std::string& out) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

bool parse_record(const std::string& line, Post& post) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return false;

  if (!read_string(j, "id", post.id) || post.id.empty()) return false;
  if (!read_string(j, "author", post.author)) return false;
  if (!read_string(j, "subreddit", post.community) || post.community.empty()) return false;
  if (!read_epoch(j, "created_utc", post.created_at) || post.created_at <= 0) return false;

  std::string parent;
  if (j.contains("parent_id")) {
    if (!read_string(j, "parent_id", parent) || parent.empty()) return false;
    post.parent_id = parent;
  } else {
    post.parent_id.reset();
  }

  std::string link;
  if (j.contains("link_id")) {
    if (!read_string(j, "link_id", link) || link.empty()) return false;
    post.link_id = link;
  } else if (!post.parent_id) {
    post.link_id = post.id;  // a submission roots its own thread
  } else {
    return false;  // comments must carry their thread root
  }
  if (!post.parent_id && post.link_id != post.id) return false;

  auto body = j.find("body");
  if (body == j.end() || !body->is_string()) return false;
  post.body = body->get<std::string>();

  Seconds acct = 0;
  if (j.contains("author_created_utc") && read_epoch(j, "author_created_utc", acct)) {
    post.author_created_at = acct;
  } else {
    post.author_created_at.reset();
  }
  return true;
}

void finish(ParseResult& result) {
  if (result.total_lines > 0 && result.malformed * 2 > result.total_lines) {
    throw DataError("more than half of archive lines are malformed (" +
                    std::to_string(result.malformed) + "/" +
                    std::to_string(result.total_lines) +
                    "); input is likely not in the expected schema");
  }
}

}  // namespace

ParseResult parse_archive_lines(const std::vector<std::string>& lines) {
  ParseResult result;
  for (const auto& line : lines) {
    if (trim(line).empty()) continue;
    ++result.total_lines;
    Post post;
    if (parse_record(line, post)) {
      result.posts.push_back(std::move(post));
    } else {
      ++result.malformed;
    }
  }
  finish(result);
  return result;
}

ParseResult parse_archive_file(const std::string& path) {
  ParseResult result;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    ++result.total_lines;
    Post post;
    if (parse_record(line, post)) {
      result.posts.push_back(std::move(post));
    } else {
      ++result.malformed;
    }
  }
  finish(result);
  return result;
}

std::string to_archive_line(const Post& post) {
  json j;
  j["id"] = post.id;
  j["author"] = post.author;
  j["subreddit"] = post.community;
  j["created_utc"] = post.created_at;
  if (post.parent_id) j["parent_id"] = *post.parent_id;
  j["link_id"] = post.link_id;
  j["body"] = post.body;
  if (post.author_created_at) j["author_created_utc"] = *post.author_created_at;
  return j.dump();
}

void write_archive_file(const std::string& path, const std::vector<Post>& posts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open archive for writing: " + path);
  for (const auto& post : posts) out << to_archive_line(post) << '\n';
  if (!out) throw DataError("archive write failure: " + path);
}

}  // namespace firstreply
