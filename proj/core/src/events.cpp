#include "firstreply/events.hpp"

#include <algorithm>
#include <unordered_map>

#include "firstreply/errors.hpp"
#include "firstreply/text.hpp"

namespace firstreply {

const char* to_string(PostKind kind) {
  return kind == PostKind::comment ? "comment" : "submission";
}

bool engagement_outcome(const std::string& user, const Post& event_post,
                        const std::vector<Post>& posts, Seconds cutoff) {
  for (const auto& p : posts) {
    if (p.author != user || p.community != event_post.community) continue;
    if (p.created_at <= event_post.created_at) continue;
    if (p.created_at > cutoff) continue;
    if (p.link_id != event_post.link_id) return true;
  }
  return false;
}

ExtractionResult extract_first_posts(const std::vector<Post>& posts,
                                     const ThreadIndex& index,
                                     const std::string& community, Seconds cutoff,
                                     const ScoreMap& scores) {
  ExtractionResult result;

  std::unordered_map<std::string, std::vector<size_t>> by_author;
  for (size_t i = 0; i < posts.size(); ++i) {
    if (posts[i].community != community) {
      throw DataError("extract_first_posts: post " + posts[i].id +
                      " belongs to community " + posts[i].community +
                      ", expected " + community);
    }
    by_author[posts[i].author].push_back(i);
  }

  auto earlier = [&](size_t a, size_t b) {
    if (posts[a].created_at != posts[b].created_at)
      return posts[a].created_at < posts[b].created_at;
    return posts[a].id < posts[b].id;
  };

  for (auto& [author, own] : by_author) {
    std::sort(own.begin(), own.end(), earlier);
    size_t first = own.front();
    const Post& fp = posts[first];
    if (fp.created_at > cutoff) continue;

    FirstPostEvent ev;
    ev.user = author;
    ev.community = community;
    ev.kind = fp.is_submission() ? PostKind::submission : PostKind::comment;
    ev.post_id = fp.id;
    ev.first_post_time = fp.created_at;
    ev.nest_level = index.nest_level[first];
    ev.word_count = static_cast<int64_t>(whitespace_token_count(fp.body));

    if (fp.author_created_at) {
      ev.account_age = std::max<Seconds>(0, fp.created_at - *fp.author_created_at);
    } else {
      ++result.missing_account_age;
    }

    if (fp.body.empty()) {
      ev.valence = 0.0;  // deleted placeholder: threading only
    } else if (auto it = scores.find(fp.id); it != scores.end()) {
      ev.valence = it->second.sentiment;
    } else {
      ev.valence = 0.0;
      ++result.unscored_first_posts;
    }

    // first direct reply from a different author, within the cutoff
    for (size_t child : index.children[first]) {
      const Post& reply = posts[child];
      if (reply.author == author) continue;  // self-replies are not treatment
      if (reply.created_at > cutoff) continue;
      ReplyFeatures rf;
      rf.reply_post_id = reply.id;
      rf.reply_time = reply.created_at;
      if (!reply.body.empty()) {
        if (auto it = scores.find(reply.id); it != scores.end()) {
          rf.sentiment = it->second.sentiment;
          rf.toxicity = it->second.toxicity;
          rf.attack = it->second.attack;
          rf.scored = true;
        }
      }
      if (!rf.scored) ++result.unscored_replies;
      ev.treated = true;
      ev.first_reply = rf;
      break;  // children are sorted, so this is the earliest
    }

    // earliest post in another thread, unbounded; the cutoff applies below
    for (size_t idx : own) {
      const Post& p = posts[idx];
      if (p.created_at <= ev.first_post_time) continue;
      if (p.link_id == fp.link_id) continue;
      ev.first_other_thread_time = p.created_at;
      break;
    }
    ev.engaged = ev.first_other_thread_time && *ev.first_other_thread_time <= cutoff;

    result.events.push_back(std::move(ev));
  }

  std::sort(result.events.begin(), result.events.end(),
            [](const FirstPostEvent& a, const FirstPostEvent& b) { return a.user < b.user; });
  return result;
}

}  // namespace firstreply
