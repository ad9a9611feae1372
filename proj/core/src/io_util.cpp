#include "firstreply/io_util.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "firstreply/errors.hpp"

namespace firstreply {

struct LineReader::Impl {
  gzFile gz = nullptr;  // zlib reads plain files too, but keep ifstream for clarity
  std::ifstream plain;
  bool use_gz = false;
  std::string buf;
};

LineReader::LineReader(const std::string& path) : impl_(std::make_unique<Impl>()) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    impl_->use_gz = true;
    impl_->gz = gzopen(path.c_str(), "rb");
    if (!impl_->gz) throw DataError("cannot open archive: " + path);
  } else {
    impl_->plain.open(path, std::ios::binary);
    if (!impl_->plain) throw DataError("cannot open archive: " + path);
  }
}

LineReader::~LineReader() {
  if (impl_ && impl_->gz) gzclose(impl_->gz);
}

bool LineReader::next(std::string& line) {
  if (impl_->use_gz) {
    line.clear();
    char chunk[1 << 14];
    for (;;) {
      if (gzgets(impl_->gz, chunk, sizeof(chunk)) == nullptr) {
        int errnum = 0;
        const char* msg = gzerror(impl_->gz, &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END) {
          throw DataError(std::string("archive read failure: ") + (msg ? msg : "gzip error"));
        }
        return !line.empty();
      }
      size_t got = std::strlen(chunk);
      line.append(chunk, got);
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      // long line: keep accumulating
    }
  }
  if (!std::getline(impl_->plain, line)) {
    if (impl_->plain.bad()) throw DataError("archive read failure");
    return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << contents;
  if (!out) throw DataError("write failure: " + path);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  // std::to_chars gives the shortest round-trip form
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::optional<long long> parse_int(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

}  // namespace firstreply
