#include "firstreply/hate_lexicon.hpp"

#include <fstream>

#include "firstreply/errors.hpp"
#include "firstreply/io_util.hpp"
#include "firstreply/text.hpp"

namespace firstreply {

HateLexicon load_hate_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open hate lexicon: " + path);
  HateLexicon lexicon;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2) throw DataError("hate lexicon row needs word<TAB>replacement: " + line);
    std::string word = to_lower(trim(fields[0]));
    HateLexiconEntry entry;
    entry.replacement = trim(fields[1]);
    entry.note = fields.size() > 2 ? trim(fields[2]) : "";
    if (word.empty() || entry.replacement.empty()) {
      throw DataError("hate lexicon entries must be non-empty: " + line);
    }
    lexicon.entries[word] = std::move(entry);
  }
  return lexicon;
}

void save_hate_lexicon(const std::string& path, const HateLexicon& lexicon) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write hate lexicon: " + path);
  for (const auto& [word, entry] : lexicon.entries) {
    out << word << '\t' << entry.replacement << '\t' << entry.note << '\n';
  }
}

void validate_replacements(const HateLexicon& lexicon,
                           const std::set<std::string>& sentiment_words) {
  std::string offenders;
  for (const auto& [word, entry] : lexicon.entries) {
    if (entry.replacement.empty()) {
      throw DataError("hate lexicon: empty replacement for " + word);
    }
    for (const auto& token : vocab_tokens(entry.replacement)) {
      if (sentiment_words.count(token)) {
        if (!offenders.empty()) offenders += ", ";
        offenders += word + " -> " + token;
      }
    }
    // a replacement containing a lexicon word would break idempotence
    for (const auto& token : vocab_tokens(entry.replacement)) {
      if (lexicon.contains(token)) {
        throw DataError("hate lexicon: replacement for " + word +
                        " contains lexicon word " + token);
      }
    }
  }
  if (!offenders.empty()) {
    throw DataError("hate lexicon replacements collide with sentiment lexicon: " + offenders);
  }
}

std::string substitute_hate_words(const std::string& text, const HateLexicon& lexicon) {
  if (lexicon.entries.empty()) return text;
  auto spans = token_spans(text);
  std::string out;
  out.reserve(text.size());
  size_t cursor = 0;
  for (const auto& span : spans) {
    std::string token = to_lower(span.view(text));
    auto it = lexicon.entries.find(token);
    if (it == lexicon.entries.end()) continue;
    out.append(text, cursor, span.begin - cursor);
    out.append(it->second.replacement);
    cursor = span.begin + span.length;
  }
  if (cursor == 0) return text;  // untouched: byte-identical
  out.append(text, cursor, text.size() - cursor);
  return out;
}

}  // namespace firstreply
