#include "firstreply/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "firstreply/errors.hpp"
#include "firstreply/rng.hpp"

namespace firstreply {

using nlohmann::json;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Token pools for generated bodies. Stub-lexicon words appear at rates tied
// to the planted toxicity/attack so rescoring correlates with the truth;
// hate words are a disjoint set of pseudo-words so the substitution analysis
// has a clean signal.
const char* kFiller[] = {"the",  "match",  "series", "game",   "update", "thread",
                         "post", "report", "video",  "guide",  "about",  "with",
                         "from", "today",  "people", "player", "team",   "story"};
const char* kPositive[] = {"good", "great", "nice", "happy", "love"};
const char* kNegative[] = {"bad", "terrible", "awful", "sad"};
const char* kToxic[] = {"trash", "garbage", "disgusting", "scum", "worthless"};
const char* kInsult[] = {"idiot", "loser", "moron", "pathetic", "clown"};
const char* kHateWords[] = {"glorbak", "vexnid",  "smorlig", "drazzle", "quibnor",
                            "fleznak", "wubbert", "croblin", "yarnpex", "zulgrim",
                            "mexplod", "torvask", "neblurn", "squamph", "gribbol"};
const char* kNeutralDecoys[] = {"window", "bottle", "carpet", "garden", "pencil",
                                "mirror", "blanket", "kettle", "ladder", "basket"};

template <size_t N>
const char* pick(Rng& rng, const char* const (&pool)[N]) {
  return pool[rng.next_below(N)];
}

struct BodySpec {
  int filler = 10;
  int positive = 0;
  int negative = 0;
  int toxic = 0;
  int insult = 0;
  bool second_person = false;
};

std::string make_body(Rng& rng, const BodySpec& spec) {
  std::vector<std::string> tokens;
  for (int i = 0; i < spec.filler; ++i) tokens.push_back(pick(rng, kFiller));
  for (int i = 0; i < spec.positive; ++i) tokens.push_back(pick(rng, kPositive));
  for (int i = 0; i < spec.negative; ++i) tokens.push_back(pick(rng, kNegative));
  for (int i = 0; i < spec.toxic; ++i) tokens.push_back(pick(rng, kToxic));
  for (int i = 0; i < spec.insult; ++i) tokens.push_back(pick(rng, kInsult));
  if (spec.second_person) tokens.push_back("you");
  rng.shuffle(tokens);
  std::string body;
  for (const auto& t : tokens) {
    if (!body.empty()) body.push_back(' ');
    body += t;
  }
  return body;
}

std::string community_user(const std::string& community, int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "u%06lld", static_cast<long long>(i));
  return community + "_" + buf;
}

// Newcomers only ever attach to veteran-authored posts; that keeps the
// planted treatment assignment (veteran reply or nothing) exactly observable.
struct AttachPoint {
  std::string root_id;
  std::string parent_id;
  int parent_level = 0;
};

constexpr Seconds kSeedWindow = 3600;      // veterans post in the first hour
constexpr Seconds kArrivalDelay = 7200;    // newcomers arrive after veterans

}  // namespace

SynthParams SynthParams::defaults() {
  SynthParams p;
  p.hateful_replies.sentiment_mean = -0.35;
  p.hateful_replies.sentiment_sd = 0.3;
  p.hateful_replies.toxicity_alpha = 3.0;
  p.hateful_replies.toxicity_beta = 3.0;
  p.hateful_replies.attack_alpha = 3.0;
  p.hateful_replies.attack_beta = 3.5;
  p.nonhateful_replies.sentiment_mean = 0.25;
  p.nonhateful_replies.sentiment_sd = 0.3;
  p.nonhateful_replies.toxicity_alpha = 1.0;
  p.nonhateful_replies.toxicity_beta = 9.0;
  p.nonhateful_replies.attack_alpha = 1.0;
  p.nonhateful_replies.attack_beta = 12.0;

  auto beta = [](double b0, double br, double bs, double bt, double ba) {
    Eigen::VectorXd v(5);
    v << b0, br, bs, bt, ba;
    return v;
  };
  // hateful columns follow the hostile-reply regime, non-hateful the benign one
  p.beta_comment_hateful = beta(0.085, 0.09, 0.11, -0.05, -0.35);
  p.beta_comment_nonhateful = beta(0.13, 0.104, 0.060, 0.018, -0.168);
  p.beta_submission_hateful = beta(-0.435, 0.366, -0.015, 0.161, -0.255);
  p.beta_submission_nonhateful = beta(-0.155, 0.228, 0.060, 0.038, -0.206);
  return p;
}

const Eigen::VectorXd& SynthParams::beta_for(PostKind kind, CommunityType type) const {
  if (kind == PostKind::comment) {
    return type == CommunityType::hateful ? beta_comment_hateful : beta_comment_nonhateful;
  }
  return type == CommunityType::hateful ? beta_submission_hateful : beta_submission_nonhateful;
}

const ReplyFeatureDistribution& SynthParams::replies_for(CommunityType type) const {
  return type == CommunityType::hateful ? hateful_replies : nonhateful_replies;
}

SynthCorpus generate_corpus(const SynthParams& params) {
  if (params.communities.empty()) throw DataError("synth: no communities configured");
  for (const auto& c : params.communities) {
    if (c.user_count < 1) throw DataError("synth: user_count must be >= 1 in " + c.name);
    Seconds cutoff = c.ban_date.value_or(params.timeline_end);
    if (cutoff <= params.timeline_start + kArrivalDelay + 2 ||
        cutoff > params.timeline_end) {
      throw DataError("synth: cutoff leaves no room for newcomers in " + c.name);
    }
  }
  if (params.comment_fraction < 0.0 || params.comment_fraction > 1.0 ||
      params.reply_prob_comment < 0.0 || params.reply_prob_comment > 1.0 ||
      params.reply_prob_submission < 0.0 || params.reply_prob_submission > 1.0 ||
      params.hate_word_injection_rate < 0.0 || params.hate_word_injection_rate > 1.0) {
    throw DataError("synth: probabilities must lie in [0,1]");
  }
  if (params.sigma2 < 0.0) throw DataError("synth: sigma2 must be nonnegative");
  for (PostKind kind : {PostKind::comment, PostKind::submission}) {
    for (CommunityType type : {CommunityType::hateful, CommunityType::non_hateful}) {
      if (params.beta_for(kind, type).size() != kEngagementCols) {
        throw DataError("synth: beta vectors need 5 entries");
      }
    }
  }

  SynthCorpus corpus;
  corpus.truth.params = params;
  for (const char* w : kHateWords) corpus.truth.hate_words.emplace_back(w);

  for (const auto& cp : params.communities) {
    Rng rng = Rng::keyed(params.seed, "synth-" + cp.name);
    const Seconds cutoff = cp.ban_date.value_or(params.timeline_end);
    const double sigma = std::sqrt(params.sigma2);

    CommunityTruth truth;
    truth.community = cp.name;
    truth.type = cp.type;
    truth.u_comment = sigma * rng.next_normal();
    truth.u_submission = sigma * rng.next_normal();

    int64_t post_counter = 0;
    auto next_post_id = [&] {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "_t%07lld", static_cast<long long>(post_counter++));
      return cp.name + buf;
    };

    // each hateful community leans on its own subset of the slur pool, so
    // per-word counts clear the detection vocabulary floor
    std::vector<std::string> community_hate_words(std::begin(kHateWords),
                                                  std::end(kHateWords));
    rng.shuffle(community_hate_words);
    community_hate_words.resize(8);

    std::vector<Post> posts;
    auto inject_hate = [&](Post& p) {
      if (cp.type == CommunityType::hateful &&
          rng.next_uniform() < params.hate_word_injection_rate) {
        p.body += " ";
        p.body += community_hate_words[rng.next_below(community_hate_words.size())];
      }
    };

    // Veterans seed the base threads (their first posts: submissions in the
    // first hour) and author every reply to a newcomer.
    const int64_t veterans = std::max<int64_t>(5, cp.user_count / 100);
    const int64_t base_threads = std::max<int64_t>(12, cp.user_count / 10);
    std::vector<std::string> veteran_names;
    std::vector<std::string> veteran_roots;
    std::vector<AttachPoint> attach_points;
    for (int64_t v = 0; v < veterans; ++v) {
      veteran_names.push_back(cp.name + "_vet" + std::to_string(v));
    }
    for (int64_t t = 0; t < base_threads; ++t) {
      Post p;
      p.id = next_post_id();
      p.author = veteran_names[static_cast<size_t>(t % veterans)];
      p.community = cp.name;
      p.created_at = params.timeline_start +
                     static_cast<Seconds>(rng.next_below(static_cast<uint64_t>(kSeedWindow)));
      p.link_id = p.id;
      p.body = make_body(rng, BodySpec{});
      inject_hate(p);
      veteran_roots.push_back(p.id);
      attach_points.push_back({p.id, p.id, 0});
      // occasional veteran chains give newcomer comments nest-level variety
      if (rng.next_uniform() < 0.5) {
        Post c1;
        c1.id = next_post_id();
        c1.author = veteran_names[rng.next_below(veteran_names.size())];
        c1.community = cp.name;
        c1.created_at = p.created_at + 60 + static_cast<Seconds>(rng.next_below(600));
        c1.link_id = p.id;
        c1.parent_id = p.id;
        c1.body = make_body(rng, BodySpec{.filler = 6});
        inject_hate(c1);
        attach_points.push_back({p.id, c1.id, 1});
        if (rng.next_uniform() < 0.4) {
          Post c2;
          c2.id = next_post_id();
          c2.author = veteran_names[rng.next_below(veteran_names.size())];
          c2.community = cp.name;
          c2.created_at = c1.created_at + 60 + static_cast<Seconds>(rng.next_below(600));
          c2.link_id = p.id;
          c2.parent_id = c1.id;
          c2.body = make_body(rng, BodySpec{.filler = 6});
          inject_hate(c2);
          attach_points.push_back({p.id, c2.id, 2});
          posts.push_back(std::move(c2));
        }
        posts.push_back(std::move(c1));
      }
      posts.push_back(std::move(p));
    }

    const int64_t newcomers = std::max<int64_t>(0, cp.user_count - veterans);
    truth.newcomers = newcomers;
    double sum_p_treated_c = 0, sum_p_control_c = 0;
    int64_t n_treated_c = 0, n_control_c = 0;
    double sum_p_treated_s = 0, sum_p_control_s = 0;
    int64_t n_treated_s = 0, n_control_s = 0;

    const Seconds arrival_base = params.timeline_start + kArrivalDelay;
    const Seconds arrival_span = std::max<Seconds>(1, cutoff - arrival_base - 1);
    const auto& feat = params.replies_for(cp.type);

    for (int64_t nuser = 0; nuser < newcomers; ++nuser) {
      const std::string user = community_user(cp.name, nuser);
      const Seconds arrive =
          arrival_base +
          static_cast<Seconds>(rng.next_below(static_cast<uint64_t>(arrival_span)));
      const bool is_comment = rng.next_uniform() < params.comment_fraction;
      const PostKind kind = is_comment ? PostKind::comment : PostKind::submission;

      Post first;
      first.id = next_post_id();
      first.author = user;
      first.community = cp.name;
      first.created_at = arrive;
      // ~2% of accounts lack a creation time, exercising the missing-covariate path
      if (rng.next_uniform() >= 0.02) {
        Seconds age = static_cast<Seconds>(
            std::exp(std::log(3600.0) +
                     rng.next_uniform() * (std::log(94608000.0) - std::log(3600.0))));
        first.author_created_at = arrive - age;
      }
      BodySpec body_spec;
      body_spec.filler = 4 + static_cast<int>(rng.next_below(25));
      double mood = rng.next_uniform();
      if (mood < 0.3) body_spec.positive = 1 + static_cast<int>(rng.next_below(2));
      else if (mood < 0.6) body_spec.negative = 1 + static_cast<int>(rng.next_below(2));
      first.body = make_body(rng, body_spec);
      inject_hate(first);

      if (is_comment) {
        const AttachPoint& at = attach_points[rng.next_below(attach_points.size())];
        first.link_id = at.root_id;
        first.parent_id = at.parent_id;
      } else {
        first.link_id = first.id;
      }

      // treatment: a veteran replies to the first post
      const double reply_prob =
          is_comment ? params.reply_prob_comment : params.reply_prob_submission;
      const bool treated = rng.next_uniform() < reply_prob;
      double s = 0.0, t = 0.0, a = 0.0;
      if (treated) {
        s = rng.next_truncated_normal(feat.sentiment_mean, feat.sentiment_sd, -1.0, 1.0);
        t = rng.next_beta(feat.toxicity_alpha, feat.toxicity_beta);
        a = rng.next_beta(feat.attack_alpha, feat.attack_beta);

        Post reply;
        reply.id = next_post_id();
        reply.author = veteran_names[rng.next_below(veteran_names.size())];
        reply.community = cp.name;
        reply.created_at = std::min<Seconds>(
            cutoff, first.created_at + 60 + static_cast<Seconds>(rng.next_below(86400)));
        reply.link_id = first.link_id;
        reply.parent_id = first.id;
        BodySpec reply_spec;
        reply_spec.filler = 4 + static_cast<int>(rng.next_below(12));
        reply_spec.toxic = static_cast<int>(std::lround(t * 5.0));
        reply_spec.insult = static_cast<int>(std::lround(a * 4.0));
        reply_spec.second_person = a > 0.45;
        if (s > 0.15) reply_spec.positive = 1 + static_cast<int>(std::lround(s * 3.0));
        if (s < -0.15) reply_spec.negative = 1 + static_cast<int>(std::lround(-s * 3.0));
        reply.body = make_body(rng, reply_spec);
        inject_hate(reply);
        corpus.truth.reply_features[reply.id] = {s, t, a};
        posts.push_back(std::move(reply));
      }

      // planted engagement from the true model, common-random-number keyed
      const Eigen::VectorXd& beta = params.beta_for(kind, cp.type);
      double u = is_comment ? truth.u_comment : truth.u_submission;
      double eta = beta[0] + u;
      if (treated) eta += beta[1] + beta[2] * s + beta[3] * t + beta[4] * a;
      double p = sigmoid(eta);
      bool engaged = keyed_uniform(params.seed, cp.name, user) < p;

      if (is_comment) {
        (treated ? sum_p_treated_c : sum_p_control_c) += p;
        (treated ? n_treated_c : n_control_c) += 1;
      } else {
        (treated ? sum_p_treated_s : sum_p_control_s) += p;
        (treated ? n_treated_s : n_control_s) += 1;
      }

      if (engaged) {
        // the return post lands in a different veteran-owned thread
        size_t root_pick = rng.next_below(veteran_roots.size());
        if (veteran_roots[root_pick] == first.link_id) {
          root_pick = (root_pick + 1) % veteran_roots.size();
        }
        Post later;
        later.id = next_post_id();
        later.author = user;
        later.community = cp.name;
        Seconds delay = 1800 + static_cast<Seconds>(rng.next_below(86400 * 10));
        later.created_at = std::min<Seconds>(cutoff, first.created_at + delay);
        later.link_id = veteran_roots[root_pick];
        later.parent_id = later.link_id;
        later.body = make_body(rng, BodySpec{.filler = 6});
        inject_hate(later);
        posts.push_back(std::move(later));
      } else if (rng.next_uniform() < 0.25) {
        // some lurkers post again in the same thread only
        Post same;
        same.id = next_post_id();
        same.author = user;
        same.community = cp.name;
        same.created_at = std::min<Seconds>(
            cutoff, first.created_at + 600 + static_cast<Seconds>(rng.next_below(86400 * 5)));
        same.link_id = first.link_id;
        same.parent_id = first.id;
        same.body = make_body(rng, BodySpec{.filler = 5});
        inject_hate(same);
        posts.push_back(std::move(same));
      }
      posts.push_back(std::move(first));
    }

    if (n_treated_c > 0 && n_control_c > 0 && sum_p_control_c > 0) {
      truth.mean_p_treated_comment = sum_p_treated_c / n_treated_c;
      truth.mean_p_control_comment = sum_p_control_c / n_control_c;
      truth.true_err_comment = truth.mean_p_treated_comment / truth.mean_p_control_comment;
    }
    if (n_treated_s > 0 && n_control_s > 0 && sum_p_control_s > 0) {
      truth.mean_p_treated_submission = sum_p_treated_s / n_treated_s;
      truth.mean_p_control_submission = sum_p_control_s / n_control_s;
      truth.true_err_submission =
          truth.mean_p_treated_submission / truth.mean_p_control_submission;
    }
    corpus.truth.communities.push_back(truth);

    std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
      if (a.created_at != b.created_at) return a.created_at < b.created_at;
      return a.id < b.id;
    });
    corpus.posts.insert(corpus.posts.end(), posts.begin(), posts.end());
  }

  // neutral background corpus for the distinctive-word baseline
  {
    Rng rng = Rng::keyed(params.seed, "synth-background");
    for (int i = 0; i < 3000; ++i) {
      Post p;
      p.id = "bg_t" + std::to_string(i);
      p.author = "bg_user" + std::to_string(i % 500);
      p.community = "background";
      p.created_at = params.timeline_start + i;
      p.link_id = p.id;
      BodySpec spec;
      spec.filler = 6 + static_cast<int>(rng.next_below(20));
      double mood = rng.next_uniform();
      if (mood < 0.25) spec.positive = 1;
      else if (mood < 0.5) spec.negative = 1;
      if (rng.next_uniform() < 0.05) spec.toxic = 1;
      spec.second_person = rng.next_uniform() < 0.3;
      p.body = make_body(rng, spec);
      corpus.background_posts.push_back(std::move(p));
    }
  }

  // annotation sheet: hate words total >= 4 across 3 raters, decoys below
  {
    Rng rng = Rng::keyed(params.seed, "synth-annotations");
    for (const char* w : kHateWords) {
      int total_target = 4 + static_cast<int>(rng.next_below(3));  // 4..6
      std::vector<int> row(3, 2);
      int excess = 6 - total_target;
      for (int k = 0; k < excess; ++k) row[static_cast<size_t>(k % 3)] -= 1;
      corpus.annotations.words.emplace_back(w);
      corpus.annotations.ratings.push_back(row);
      corpus.replacements[w] = rng.next_uniform() < 0.5 ? "person" : "neighbor";
    }
    for (const char* w : kNeutralDecoys) {
      std::vector<int> row(3, 0);
      if (rng.next_uniform() < 0.3) row[rng.next_below(3)] = 1;
      corpus.annotations.words.emplace_back(w);
      corpus.annotations.ratings.push_back(row);
    }
  }
  return corpus;
}

std::string truth_to_json(const SynthTruth& truth, bool include_post_features) {
  json j;
  j["sigma2"] = truth.params.sigma2;
  j["seed"] = truth.params.seed;
  j["hate_words"] = truth.hate_words;
  json comms = json::array();
  for (const auto& c : truth.communities) {
    json jc;
    jc["community"] = c.community;
    jc["type"] = to_string(c.type);
    jc["u_comment"] = c.u_comment;
    jc["u_submission"] = c.u_submission;
    jc["newcomers"] = c.newcomers;
    jc["mean_p_treated_comment"] = c.mean_p_treated_comment;
    jc["mean_p_control_comment"] = c.mean_p_control_comment;
    if (c.true_err_comment) jc["true_err_comment"] = *c.true_err_comment;
    if (c.true_err_submission) jc["true_err_submission"] = *c.true_err_submission;
    comms.push_back(jc);
  }
  j["communities"] = comms;
  auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["beta"] = {{"comment_hateful", to_vec(truth.params.beta_comment_hateful)},
               {"comment_nonhateful", to_vec(truth.params.beta_comment_nonhateful)},
               {"submission_hateful", to_vec(truth.params.beta_submission_hateful)},
               {"submission_nonhateful", to_vec(truth.params.beta_submission_nonhateful)}};
  if (include_post_features) {
    json feats;
    for (const auto& [id, f] : truth.reply_features) {
      feats[id] = {{"sentiment", f.sentiment}, {"toxicity", f.toxicity}, {"attack", f.attack}};
    }
    j["reply_features"] = feats;
  }
  return j.dump(2);
}

}  // namespace firstreply
