#pragma once

#include <optional>
#include <string>
#include <vector>

#include "firstreply/events.hpp"
#include "firstreply/post.hpp"

namespace firstreply {

// Community-level matching features: size and how quickly newcomers return.
struct CommunityProfile {
  std::string community;
  int64_t size = 0;  // distinct posting users
  std::optional<Seconds> ban_date;
  Seconds p90_return = 0;
  bool hateful = false;
};

struct P90Result {
  Seconds p90 = 0;
  size_t returning_users = 0;
  bool low_sample = false;  // fewer than 10 returning users
};

// 90th percentile (nearest rank) of the gap between a user's first and second
// post, over users with at least two posts in the community.
P90Result p90_return_time(const std::vector<Post>& posts);

// Simulated ban at the matched hateful community's ban date: drops events
// whose first post lands after ban_date - p90 (they may have been unable to
// return), and recomputes treatment and engagement with the ban as cutoff.
std::vector<FirstPostEvent> apply_simulated_ban(std::vector<FirstPostEvent> events,
                                                Seconds ban_date, Seconds p90);

}  // namespace firstreply
