#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace firstreply {

// Line-oriented reader over a plain or gzip-compressed file. Paths ending in
// ".gz" are inflated transparently.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Returns false at end of stream. Strips the trailing '\n' (and '\r').
  bool next(std::string& line);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Simple delimited-text helpers used by the report writers. Fields containing
// the delimiter, quotes or newlines are quoted per RFC 4180.
std::string csv_escape(const std::string& field);
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::string> split(const std::string& s, char delim);

std::string trim(const std::string& s);

// Canonical float formatting for artifacts: shortest representation that
// round-trips, so repeated runs emit identical bytes.
std::string format_double(double v);

std::optional<long long> parse_int(const std::string& s);
std::optional<double> parse_double(const std::string& s);

}  // namespace firstreply
