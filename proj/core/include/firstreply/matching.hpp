#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "firstreply/cohort.hpp"
#include "firstreply/events.hpp"

namespace firstreply {

double mahalanobis(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const Eigen::MatrixXd& cov_inv);

struct MatchedPair {
  size_t treated_index = 0;  // into the treated pool passed to match_users
  size_t control_index = 0;
  double distance = 0.0;
};

struct MatchedPairs {
  std::vector<MatchedPair> pairs;
  std::vector<size_t> unmatched_treated;   // controls ran out
  Eigen::MatrixXd covariance;              // pooled, post-ridge
  std::vector<std::string> features;
  size_t treated_pool_size = 0;            // after subsampling
  size_t control_pool_size = 0;
};

// User-level covariates entering the distance. Submission pools drop
// nest_level (constant zero there).
enum class MatchFeature { account_age, nest_level, valence, word_count };
std::vector<MatchFeature> features_for_kind(PostKind kind);
const char* to_string(MatchFeature f);

// Greedy nearest-neighbor matching without replacement. Treated units are
// visited in seeded-shuffle order; the nearest remaining control wins, ties
// by ascending user id. Pools above pool_cap are subsampled uniformly with
// the same seed. Covariance comes from the pooled (treated u control) feature
// matrix with ridge 1e-6*trace/d on the diagonal.
//
// Events missing a covariate must be excluded by the caller (see
// build_matching_pool). Throws DataError when either arm has < 2 events and
// ConvergenceError if the ridged covariance is still singular.
MatchedPairs match_users(const std::vector<FirstPostEvent>& treated,
                         const std::vector<FirstPostEvent>& control,
                         const std::vector<MatchFeature>& features,
                         int64_t pool_cap, uint64_t seed);

// Filters one community's events into the (treated, control) pools for one
// kind, dropping events with missing covariates.
struct MatchingPool {
  std::vector<FirstPostEvent> treated;
  std::vector<FirstPostEvent> control;
  size_t excluded_missing_covariates = 0;
};
MatchingPool build_matching_pool(const std::vector<FirstPostEvent>& events, PostKind kind);

struct CommunityPair {
  std::string hateful;
  std::string control;
  double distance = 0.0;
};

// Pairs each hateful community with a candidate on (log10 size,
// log10(1+p90)), greedy without replacement, biggest hateful first. The
// candidate list must already be filtered to the configured size window.
std::vector<CommunityPair> match_communities(std::vector<CommunityProfile> hateful,
                                             std::vector<CommunityProfile> candidates);

}  // namespace firstreply
