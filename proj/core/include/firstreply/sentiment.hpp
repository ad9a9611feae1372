#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace firstreply {

// Lexicon-and-rule sentiment for social-media text: word valences plus
// negation, booster, all-caps and exclamation rules, squashed to [-1,1].
struct SentimentLexicon {
  std::unordered_map<std::string, double> valences;  // lowercase word -> rating
  std::unordered_map<std::string, double> boosters;  // lowercase word -> increment
  std::unordered_set<std::string> negations;

  std::set<std::string> word_set() const;
};

// valences: TSV word<TAB>valence; boosters: TSV word<TAB>increment;
// negations: one word per line, '#' comments.
SentimentLexicon load_sentiment_lexicon(const std::string& valence_path,
                                        const std::string& booster_path,
                                        const std::string& negation_path);

// Compound valence in [-1,1]. Rules, applied per valenced token:
//   * an ALL-CAPS valenced word in otherwise mixed-case text scales x1.733;
//   * up to 3 trailing '!' each add 0.292 to the word's magnitude;
//   * a booster within the 3 preceding tokens adds its increment toward the
//     word's sign;
//   * a negation within the 3 preceding tokens multiplies by -0.74.
// The token sum s normalizes as s/sqrt(s^2+15). Valence-free text scores 0.
double sentiment(const std::string& text, const SentimentLexicon& lexicon);

}  // namespace firstreply
