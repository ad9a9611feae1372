#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firstreply/post.hpp"

namespace firstreply {

enum class PostKind { comment, submission };

const char* to_string(PostKind kind);

// Scores for a post's text, keyed by post id. Sentiment covers the newcomer's
// own first post (the valence covariate); all three cover first replies.
struct PostScores {
  double sentiment = 0.0;
  double toxicity = 0.0;
  double attack = 0.0;
};
using ScoreMap = std::map<std::string, PostScores>;

struct ReplyFeatures {
  std::string reply_post_id;
  Seconds reply_time = 0;
  double sentiment = 0.0;
  double toxicity = 0.0;
  double attack = 0.0;
  bool scored = false;  // false for deleted/empty reply bodies
};

// A newcomer's first post in one community, with pre-treatment covariates,
// treatment assignment, and the continued-engagement outcome.
struct FirstPostEvent {
  std::string user;
  std::string community;
  PostKind kind = PostKind::comment;
  std::string post_id;
  Seconds first_post_time = 0;

  std::optional<Seconds> account_age;  // missing when author_created_utc absent
  int nest_level = 0;
  double valence = 0.0;
  int64_t word_count = 0;

  bool treated = false;
  std::optional<ReplyFeatures> first_reply;  // present iff treated

  bool engaged = false;
  // Earliest time the user posted in a different thread (unbounded by the
  // cutoff); lets a simulated ban recompute `engaged` without the post table.
  std::optional<Seconds> first_other_thread_time;

  bool has_all_covariates() const { return account_age.has_value(); }
};

// True iff the user posts again in a different thread of the same community
// after their first post and no later than the cutoff.
bool engagement_outcome(const std::string& user, const Post& event_post,
                        const std::vector<Post>& posts, Seconds cutoff);

struct ExtractionResult {
  std::vector<FirstPostEvent> events;  // sorted by user id
  size_t unscored_first_posts = 0;     // non-empty body with no score entry
  size_t unscored_replies = 0;
  size_t missing_account_age = 0;
};

// Derives one event per user from a single community's (bot-filtered) posts.
// The cutoff is the community ban date (real or simulated) or end-of-data;
// users whose first post falls after it produce no event. Self-replies do not
// count as treatment.
ExtractionResult extract_first_posts(const std::vector<Post>& posts,
                                     const ThreadIndex& index,
                                     const std::string& community, Seconds cutoff,
                                     const ScoreMap& scores);

}  // namespace firstreply
