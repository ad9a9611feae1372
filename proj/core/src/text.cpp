#include "firstreply/text.hpp"

#include <cctype>

namespace firstreply {

namespace {
bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }
}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> vocab_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      if (cur.size() >= 2) out.push_back(cur);
      cur.clear();
    }
  }
  if (cur.size() >= 2) out.push_back(cur);
  return out;
}

size_t whitespace_token_count(std::string_view text) {
  size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::vector<TokenSpan> token_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  size_t i = 0;
  while (i < text.size()) {
    if (is_word_char(static_cast<unsigned char>(text[i]))) {
      size_t b = i;
      while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({b, i - b});
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace firstreply
