#pragma once

#include <string>
#include <vector>

#include "firstreply/post.hpp"

namespace firstreply {

struct ParseResult {
  std::vector<Post> posts;   // well-formed records, input order
  size_t malformed = 0;
  size_t total_lines = 0;
};

// Parses a newline-delimited post archive. One JSON record per line with
// fields {id, author, subreddit, created_utc, parent_id?, link_id, body,
// author_created_utc?}. Malformed lines are counted, not fatal, unless more
// than half the input fails to parse (wrong schema).
ParseResult parse_archive_lines(const std::vector<std::string>& lines);

// Same, streaming from a file; ".gz" paths are decompressed on the fly.
ParseResult parse_archive_file(const std::string& path);

// Serializes posts in the archive schema (one JSON object per line).
std::string to_archive_line(const Post& post);
void write_archive_file(const std::string& path, const std::vector<Post>& posts);

}  // namespace firstreply
