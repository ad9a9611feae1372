#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firstreply/annotations.hpp"
#include "firstreply/mixed_model.hpp"
#include "firstreply/post.hpp"

namespace firstreply {

// Reply feature laws per community type: truncated Gaussian sentiment, Beta
// toxicity and attack.
struct ReplyFeatureDistribution {
  double sentiment_mean = 0.0;
  double sentiment_sd = 0.3;
  double toxicity_alpha = 1.0;
  double toxicity_beta = 6.0;
  double attack_alpha = 1.0;
  double attack_beta = 8.0;
};

struct SynthCommunity {
  std::string name;
  CommunityType type = CommunityType::non_hateful;
  int64_t user_count = 0;
  std::optional<Seconds> ban_date;  // data generation stops here
};

struct SynthParams {
  std::vector<SynthCommunity> communities;
  double reply_prob_comment = 0.55;
  double reply_prob_submission = 0.5;
  double comment_fraction = 0.78;  // share of first posts that are comments
  ReplyFeatureDistribution hateful_replies;
  ReplyFeatureDistribution nonhateful_replies;
  // true engagement coefficients per (kind, type), in design-column order
  Eigen::VectorXd beta_comment_hateful;
  Eigen::VectorXd beta_comment_nonhateful;
  Eigen::VectorXd beta_submission_hateful;
  Eigen::VectorXd beta_submission_nonhateful;
  double sigma2 = 0.16;  // random-intercept variance
  double hate_word_injection_rate = 0.08;
  Seconds timeline_start = 1'500'000'000;
  Seconds timeline_end = 1'531'000'000;  // ~1 year span
  uint64_t seed = 1;

  // reasonable defaults for all four beta vectors and both feature laws
  static SynthParams defaults();
  const Eigen::VectorXd& beta_for(PostKind kind, CommunityType type) const;
  const ReplyFeatureDistribution& replies_for(CommunityType type) const;
};

struct CommunityTruth {
  std::string community;
  CommunityType type = CommunityType::non_hateful;
  double u_comment = 0.0;
  double u_submission = 0.0;
  // means of the planted Bernoulli probabilities, by arm
  double mean_p_treated_comment = 0.0;
  double mean_p_control_comment = 0.0;
  double mean_p_treated_submission = 0.0;
  double mean_p_control_submission = 0.0;
  int64_t newcomers = 0;
  std::optional<double> true_err_comment;    // nullopt when an arm is empty/zero
  std::optional<double> true_err_submission;
};

struct SynthTruth {
  std::vector<CommunityTruth> communities;
  std::map<std::string, PostScores> reply_features;  // planted reply features by post id
  std::vector<std::string> hate_words;
  SynthParams params;
};

struct SynthCorpus {
  std::vector<Post> posts;             // sorted by (community, created_at, id)
  std::vector<Post> background_posts;  // neutral baseline corpus for SAGE
  SynthTruth truth;
  AnnotationSheet annotations;         // planted hate words + neutral decoys
  std::map<std::string, std::string> replacements;  // hate word -> neutral phrase
};

// Deterministic generator: same params (incl. seed) -> byte-identical
// archive. Throws DataError for infeasible parameters.
SynthCorpus generate_corpus(const SynthParams& params);

// Serializes truth to JSON (per-community aggregates; per-post features are
// included only when requested, they get large).
std::string truth_to_json(const SynthTruth& truth, bool include_post_features = false);

}  // namespace firstreply
