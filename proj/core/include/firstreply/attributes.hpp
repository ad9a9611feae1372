#pragma once

#include <map>
#include <set>
#include <string>

namespace firstreply {

// Probabilities that a post is toxic / an attack on another participant.
struct AttributeScores {
  double toxicity = 0.0;
  double attack = 0.0;
};

// Something that can score text. Implementations: StubScorer (offline,
// deterministic) and RemoteScorer (HTTP service client).
class AttributeScorer {
 public:
  virtual ~AttributeScorer() = default;
  virtual AttributeScores score(const std::string& text) = 0;
  virtual const char* name() const = 0;
};

// Deterministic surrogate for the external service: logistic squashing of
// weighted lexicon matches. Weights are nonnegative, so adding a matched word
// never lowers a score; a second-person pronoun co-occurring with an insult
// raises the attack probability.
struct StubLexicons {
  std::map<std::string, double> toxic_weights;
  std::map<std::string, double> insult_weights;  // attack patterns
  std::set<std::string> second_person = {"you", "your", "youre", "yourself", "u", "ur"};
  double toxicity_bias;
  double attack_bias;
  double directed_bonus = 1.5;  // insult + second person

  StubLexicons();
};

// TSV word<TAB>weight files; negative weights are rejected.
StubLexicons load_stub_lexicons(const std::string& toxic_path, const std::string& insult_path);

AttributeScores score_attributes_stub(const std::string& text, const StubLexicons& lexicons);

class StubScorer final : public AttributeScorer {
 public:
  explicit StubScorer(StubLexicons lexicons) : lexicons_(std::move(lexicons)) {}
  AttributeScores score(const std::string& text) override {
    return score_attributes_stub(text, lexicons_);
  }
  const char* name() const override { return "stub"; }

 private:
  StubLexicons lexicons_;
};

struct AttributeFlags {
  bool toxic = false;
  bool attack = false;
};

// Sensitivity-analysis mode: each flag is score >= threshold. The main
// analyses keep the probabilities continuous.
AttributeFlags threshold_mode(const AttributeScores& scores, double threshold = 0.7);

}  // namespace firstreply
