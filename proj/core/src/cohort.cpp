#include "firstreply/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "firstreply/errors.hpp"

namespace firstreply {

P90Result p90_return_time(const std::vector<Post>& posts) {
  // two earliest posts per user, ties by id
  std::map<std::string, std::vector<std::pair<Seconds, std::string>>> by_user;
  for (const auto& p : posts) by_user[p.author].emplace_back(p.created_at, p.id);

  std::vector<Seconds> deltas;
  for (auto& [user, times] : by_user) {
    if (times.size() < 2) continue;
    std::sort(times.begin(), times.end());
    deltas.push_back(times[1].first - times[0].first);
  }

  P90Result result;
  result.returning_users = deltas.size();
  result.low_sample = deltas.size() < 10;
  if (deltas.empty()) return result;  // p90 = 0, flagged low_sample

  std::sort(deltas.begin(), deltas.end());
  // nearest-rank: ceil(0.9 * n), 1-based
  size_t rank = static_cast<size_t>(std::ceil(0.9 * static_cast<double>(deltas.size())));
  if (rank < 1) rank = 1;
  result.p90 = deltas[rank - 1];
  return result;
}

std::vector<FirstPostEvent> apply_simulated_ban(std::vector<FirstPostEvent> events,
                                                Seconds ban_date, Seconds p90) {
  std::erase_if(events, [&](const FirstPostEvent& ev) {
    return ev.first_post_time > ban_date - p90;  // strict: the boundary survives
  });
  for (auto& ev : events) {
    if (ev.treated && ev.first_reply->reply_time > ban_date) {
      // the reply could not have happened before the (simulated) ban
      ev.treated = false;
      ev.first_reply.reset();
    }
    ev.engaged = ev.first_other_thread_time && *ev.first_other_thread_time <= ban_date;
  }
  return events;
}

}  // namespace firstreply
