#include "firstreply/sentiment.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "firstreply/errors.hpp"
#include "firstreply/io_util.hpp"
#include "firstreply/text.hpp"

namespace firstreply {

namespace {

constexpr double kNegationScale = -0.74;
constexpr double kCapsScale = 1.733;
constexpr double kExclamationBoost = 0.292;
constexpr int kLookbackWindow = 3;

bool is_all_caps(std::string_view token) {
  bool has_letter = false;
  for (unsigned char c : token) {
    if (std::isalpha(c)) {
      has_letter = true;
      if (std::islower(c)) return false;
    }
  }
  return has_letter;
}

void load_tsv_weights(const std::string& path, std::unordered_map<std::string, double>& out,
                      const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split(t, '\t');
    if (fields.size() < 2) throw DataError(std::string(what) + " row needs word<TAB>value: " + line);
    auto v = parse_double(fields[1]);
    if (!v) throw DataError(std::string(what) + " has non-numeric value: " + line);
    out[to_lower(trim(fields[0]))] = *v;
  }
}

}  // namespace

std::set<std::string> SentimentLexicon::word_set() const {
  std::set<std::string> out;
  for (const auto& [w, _] : valences) out.insert(w);
  return out;
}

SentimentLexicon load_sentiment_lexicon(const std::string& valence_path,
                                        const std::string& booster_path,
                                        const std::string& negation_path) {
  SentimentLexicon lex;
  load_tsv_weights(valence_path, lex.valences, "sentiment lexicon");
  load_tsv_weights(booster_path, lex.boosters, "booster lexicon");
  std::ifstream in(negation_path);
  if (!in) throw DataError("cannot open negation list: " + negation_path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    lex.negations.insert(to_lower(t));
  }
  return lex;
}

double sentiment(const std::string& text, const SentimentLexicon& lexicon) {
  auto spans = token_spans(text);
  if (spans.empty()) return 0.0;

  // caps emphasis only differentiates in mixed-case text
  bool mixed_case = false;
  for (const auto& span : spans) {
    if (!is_all_caps(span.view(text))) {
      bool has_letter = false;
      for (unsigned char c : span.view(text)) {
        if (std::isalpha(c)) has_letter = true;
      }
      if (has_letter) {
        mixed_case = true;
        break;
      }
    }
  }

  std::vector<std::string> lowered(spans.size());
  for (size_t i = 0; i < spans.size(); ++i) lowered[i] = to_lower(spans[i].view(text));

  double sum = 0.0;
  for (size_t i = 0; i < spans.size(); ++i) {
    auto it = lexicon.valences.find(lowered[i]);
    if (it == lexicon.valences.end()) continue;
    double v = it->second;
    double sign = v >= 0.0 ? 1.0 : -1.0;

    if (mixed_case && is_all_caps(spans[i].view(text))) v *= kCapsScale;

    // trailing '!' run, capped at 3
    size_t after = spans[i].begin + spans[i].length;
    int bangs = 0;
    while (after < text.size() && text[after] == '!' && bangs < 3) {
      ++bangs;
      ++after;
    }
    v += sign * kExclamationBoost * bangs;

    bool negated = false;
    for (int back = 1; back <= kLookbackWindow && back <= static_cast<int>(i); ++back) {
      const std::string& prev = lowered[i - back];
      if (auto b = lexicon.boosters.find(prev); b != lexicon.boosters.end()) {
        v += sign * b->second;
      }
      if (lexicon.negations.count(prev)) negated = true;
    }
    if (negated) v *= kNegationScale;

    sum += v;
  }
  if (sum == 0.0) return 0.0;
  return sum / std::sqrt(sum * sum + 15.0);
}

}  // namespace firstreply
