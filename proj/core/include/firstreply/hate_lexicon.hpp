#pragma once

#include <map>
#include <set>
#include <string>

namespace firstreply {

struct HateLexiconEntry {
  std::string replacement;  // neutral phrase, non-empty
  std::string note;         // provenance
};

// Hate words with neutral replacement phrases for the substitution
// sensitivity analysis. Keys are lowercase single tokens.
struct HateLexicon {
  std::map<std::string, HateLexiconEntry> entries;

  bool contains(const std::string& lowercase_word) const {
    return entries.count(lowercase_word) > 0;
  }
};

// TSV: word<TAB>replacement<TAB>note
HateLexicon load_hate_lexicon(const std::string& path);
void save_hate_lexicon(const std::string& path, const HateLexicon& lexicon);

// Replacement phrases must not introduce sentiment-bearing tokens, or the
// substitution analysis would shift valence by construction. Throws DataError
// listing offenders.
void validate_replacements(const HateLexicon& lexicon,
                           const std::set<std::string>& sentiment_words);

// Case-insensitive whole-token substitution of every lexicon word with its
// neutral phrase. Text without lexicon words comes back byte-identical, and
// the operation is idempotent.
std::string substitute_hate_words(const std::string& text, const HateLexicon& lexicon);

}  // namespace firstreply
