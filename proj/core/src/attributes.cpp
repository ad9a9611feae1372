#include "firstreply/attributes.hpp"

#include <cmath>
#include <fstream>

#include "firstreply/errors.hpp"
#include "firstreply/io_util.hpp"
#include "firstreply/text.hpp"

namespace firstreply {

namespace {

// sigma(bias) = 0.05: the no-match baseline
const double kBaselineBias = std::log(0.05 / 0.95);

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void load_weights(const std::string& path, std::map<std::string, double>& out,
                  const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split(t, '\t');
    if (fields.size() < 2) throw DataError(std::string(what) + " row needs word<TAB>weight: " + line);
    auto w = parse_double(fields[1]);
    if (!w) throw DataError(std::string(what) + " has non-numeric weight: " + line);
    if (*w < 0.0) {
      throw DataError(std::string(what) + " weights must be nonnegative (monotonicity): " + line);
    }
    out[to_lower(trim(fields[0]))] = *w;
  }
}

}  // namespace

StubLexicons::StubLexicons() : toxicity_bias(kBaselineBias), attack_bias(kBaselineBias) {}

StubLexicons load_stub_lexicons(const std::string& toxic_path, const std::string& insult_path) {
  StubLexicons lex;
  load_weights(toxic_path, lex.toxic_weights, "stub toxicity lexicon");
  load_weights(insult_path, lex.insult_weights, "stub attack lexicon");
  return lex;
}

AttributeScores score_attributes_stub(const std::string& text, const StubLexicons& lexicons) {
  double toxic_sum = 0.0;
  double insult_sum = 0.0;
  bool second_person = false;
  for (const auto& token : vocab_tokens(text)) {
    if (auto it = lexicons.toxic_weights.find(token); it != lexicons.toxic_weights.end()) {
      toxic_sum += it->second;
    }
    if (auto it = lexicons.insult_weights.find(token); it != lexicons.insult_weights.end()) {
      insult_sum += it->second;
    }
    if (lexicons.second_person.count(token)) second_person = true;
  }
  // "u"/"ur" are too short for vocab tokens; check single chars directly
  if (!second_person) {
    for (const auto& span : token_spans(text)) {
      std::string tok = to_lower(span.view(text));
      if (lexicons.second_person.count(tok)) {
        second_person = true;
        break;
      }
    }
  }

  AttributeScores scores;
  scores.toxicity = sigmoid(lexicons.toxicity_bias + toxic_sum);
  double attack_logit = lexicons.attack_bias + insult_sum;
  if (second_person && insult_sum > 0.0) attack_logit += lexicons.directed_bonus;
  scores.attack = sigmoid(attack_logit);
  return scores;
}

AttributeFlags threshold_mode(const AttributeScores& scores, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DataError("threshold_mode: threshold must lie in (0,1)");
  }
  return {scores.toxicity >= threshold, scores.attack >= threshold};
}

}  // namespace firstreply
