#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace firstreply {

std::string to_lower(std::string_view s);

// Vocabulary tokenization: lowercase, split on non-alphanumeric, drop tokens
// shorter than 2 characters.
std::vector<std::string> vocab_tokens(std::string_view text);

// Whitespace tokens of the raw body (the word-count covariate).
size_t whitespace_token_count(std::string_view text);

// Position-preserving scan over alphanumeric token runs, for whole-token
// substitution. Offsets index into the original text.
struct TokenSpan {
  size_t begin;
  size_t length;
  std::string_view view(std::string_view text) const { return text.substr(begin, length); }
};
std::vector<TokenSpan> token_spans(std::string_view text);

}  // namespace firstreply
