#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "firstreply/archive.hpp"
#include "firstreply/cohort.hpp"
#include "firstreply/errors.hpp"
#include "firstreply/hashing.hpp"
#include "firstreply/io_util.hpp"
#include "firstreply/matching.hpp"
#include "firstreply/mixed_model.hpp"
#include "firstreply/rank_tests.hpp"
#include "firstreply/rng.hpp"
#include "firstreply/score_store.hpp"
#include "firstreply/simulate.hpp"
#include "firstreply/stats.hpp"
#include "pipeline_internal.hpp"

namespace firstreply::detail {

using nlohmann::json;

// ---------------------------------------------------------------------------
// events.csv round trip

std::string event_csv_header() {
  return "community,user,kind,post_id,first_post_time,account_age,nest_level,valence,"
         "word_count,treated,reply_post_id,reply_time,reply_sentiment,reply_toxicity,"
         "reply_attack,reply_scored,engaged,first_other_thread_time,role\n";
}

std::string event_to_csv(const FirstPostEvent& ev, const std::string& role) {
  std::string row;
  row += csv_escape(ev.community) + ",";
  row += csv_escape(ev.user) + ",";
  row += std::string(to_string(ev.kind)) + ",";
  row += csv_escape(ev.post_id) + ",";
  row += std::to_string(ev.first_post_time) + ",";
  row += (ev.account_age ? std::to_string(*ev.account_age) : "") + ",";
  row += std::to_string(ev.nest_level) + ",";
  row += format_double(ev.valence) + ",";
  row += std::to_string(ev.word_count) + ",";
  row += (ev.treated ? "1" : "0") + std::string(",");
  if (ev.first_reply) {
    const auto& r = *ev.first_reply;
    row += csv_escape(r.reply_post_id) + "," + std::to_string(r.reply_time) + "," +
           format_double(r.sentiment) + "," + format_double(r.toxicity) + "," +
           format_double(r.attack) + "," + (r.scored ? "1" : "0") + ",";
  } else {
    row += ",,,,,,";
  }
  row += (ev.engaged ? "1" : "0") + std::string(",");
  row += (ev.first_other_thread_time ? std::to_string(*ev.first_other_thread_time) : "") + ",";
  row += role + "\n";
  return row;
}

LoadedEvents load_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open events table: " + path);
  LoadedEvents out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 19) throw DataError("events.csv: expected 19 fields, got line: " + line);
    FirstPostEvent ev;
    ev.community = f[0];
    ev.user = f[1];
    ev.kind = f[2] == "submission" ? PostKind::submission : PostKind::comment;
    ev.post_id = f[3];
    ev.first_post_time = parse_int(f[4]).value();
    if (!f[5].empty()) ev.account_age = parse_int(f[5]).value();
    ev.nest_level = static_cast<int>(parse_int(f[6]).value());
    ev.valence = parse_double(f[7]).value();
    ev.word_count = parse_int(f[8]).value();
    ev.treated = f[9] == "1";
    if (ev.treated) {
      ReplyFeatures r;
      r.reply_post_id = f[10];
      r.reply_time = parse_int(f[11]).value();
      r.sentiment = parse_double(f[12]).value();
      r.toxicity = parse_double(f[13]).value();
      r.attack = parse_double(f[14]).value();
      r.scored = f[15] == "1";
      ev.first_reply = r;
    }
    ev.engaged = f[16] == "1";
    if (!f[17].empty()) ev.first_other_thread_time = parse_int(f[17]).value();
    out.community_hateful[ev.community] = f[18] == "hateful";
    out.events.push_back(std::move(ev));
  }
  return out;
}

// ---------------------------------------------------------------------------
// cohort

namespace {

struct CommunityClassification {
  std::map<std::string, bool> hateful;
};

CommunityClassification load_classification(const std::string& path) {
  CommunityClassification out;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open community classification: " + path);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() < 3) throw DataError("communities.csv: bad row: " + line);
    out.hateful[f[0]] = f[2] == "true";
  }
  return out;
}

ScoreMap build_score_map(const std::vector<Post>& posts, const ScoreStore& store) {
  ScoreMap map;
  for (const auto& p : posts) {
    if (p.body.empty()) continue;
    if (auto s = store.lookup(ScoreStore::hash_text(p.body))) {
      map[p.id] = PostScores{s->sentiment, s->toxicity, s->attack};
    }
  }
  return map;
}

}  // namespace

void run_cohort(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::cohort);
  check_predecessor(config, Stage::ingest);
  check_predecessor(config, Stage::detect);
  check_predecessor(config, Stage::score);

  std::string posts_path = (fs::path(config.output_dir) / "ingest" / "posts.ndjson").string();
  std::string classes_path =
      (fs::path(config.output_dir) / "detect" / "communities.csv").string();
  require_artifact(posts_path, "ingest/posts.ndjson");
  require_artifact(classes_path, "detect/communities.csv");
  require_artifact(config.score_cache, "score cache (" + config.score_cache + ")");
  require_artifact(config.ban_dates, config.ban_dates);
  require_artifact(config.match_candidates, config.match_candidates);

  auto by_community = group_by_community(parse_archive_file(posts_path).posts);
  CommunityClassification classes = load_classification(classes_path);
  std::map<std::string, Seconds> ban_dates = load_ban_dates(config.ban_dates);
  ScoreStore store(config.score_cache);

  Seconds end_of_data;
  if (config.end_of_data) {
    end_of_data = *config.end_of_data;
  } else {
    json ingest_report = json::parse(
        read_file((fs::path(config.output_dir) / "ingest" / "report.json").string()));
    end_of_data = ingest_report.at("end_of_data").get<Seconds>();
  }

  // hateful analysis set: classified hateful and present in the data
  std::vector<std::string> hateful_names;
  for (const auto& [name, is_hateful] : classes.hateful) {
    if (!is_hateful) continue;
    if (!by_community.count(name)) continue;
    if (!ban_dates.count(name)) {
      throw DataError("hateful community " + name +
                      " has no ban date; cannot simulate bans for its match");
    }
    hateful_names.push_back(name);
  }
  std::sort(hateful_names.begin(), hateful_names.end());
  if (hateful_names.empty()) throw DataError("cohort: no hateful communities to analyze");

  auto profile_of = [&](const std::string& name, bool hateful) {
    CommunityProfile p;
    p.community = name;
    p.hateful = hateful;
    const auto& posts = by_community.at(name);
    std::set<std::string> users;
    for (const auto& post : posts) users.insert(post.author);
    p.size = static_cast<int64_t>(users.size());
    p.p90_return = p90_return_time(posts).p90;
    if (auto it = ban_dates.find(name); it != ban_dates.end()) p.ban_date = it->second;
    return p;
  };

  std::vector<CommunityProfile> hateful_profiles;
  for (const auto& name : hateful_names) hateful_profiles.push_back(profile_of(name, true));

  std::vector<CommunityProfile> candidate_profiles;
  size_t size_filtered = 0;
  for (const auto& name : load_name_list(config.match_candidates)) {
    if (!by_community.count(name)) continue;
    if (classes.hateful.count(name) && classes.hateful.at(name)) continue;
    CommunityProfile p = profile_of(name, false);
    if (p.size < config.candidate_min_members || p.size > config.candidate_max_members) {
      ++size_filtered;
      continue;
    }
    candidate_profiles.push_back(std::move(p));
  }

  std::vector<CommunityPair> community_pairs =
      match_communities(hateful_profiles, candidate_profiles);
  std::sort(community_pairs.begin(), community_pairs.end(),
            [](const CommunityPair& a, const CommunityPair& b) { return a.hateful < b.hateful; });

  std::map<std::string, CommunityProfile> profiles;
  for (auto& p : hateful_profiles) profiles[p.community] = p;
  for (auto& p : candidate_profiles) profiles[p.community] = p;

  // per community-pair extraction and per-community matching
  struct PairWork {
    std::vector<FirstPostEvent> hateful_events;
    std::vector<FirstPostEvent> control_events;
    size_t excluded_missing = 0;
    std::string pairs_csv;   // user-level matched pairs for both communities
    json skips = json::array();
  };
  std::vector<PairWork> work(community_pairs.size());

  auto match_one_community = [&](const std::string& community,
                                 const std::vector<FirstPostEvent>& events, PairWork& w) {
    for (PostKind kind : {PostKind::comment, PostKind::submission}) {
      MatchingPool pool = build_matching_pool(events, kind);
      w.excluded_missing += pool.excluded_missing_covariates;
      if (pool.treated.size() < 2 || pool.control.size() < 2) {
        json skip;
        skip["community"] = community;
        skip["kind"] = to_string(kind);
        skip["treated"] = pool.treated.size();
        skip["control"] = pool.control.size();
        w.skips.push_back(skip);
        continue;
      }
      uint64_t seed = config.cohort_seed ^ fnv1a(community + "/" + to_string(kind));
      MatchedPairs matched =
          match_users(pool.treated, pool.control, features_for_kind(kind), config.pool_cap, seed);
      for (const auto& mp : matched.pairs) {
        w.pairs_csv += community + "," + to_string(kind) + "," +
                       csv_escape(pool.treated[mp.treated_index].user) + "," +
                       csv_escape(pool.control[mp.control_index].user) + "," +
                       format_double(mp.distance) + "\n";
      }
    }
  };

  parallel_for(community_pairs.size(), config.threads, [&](size_t i) {
    const CommunityPair& pair = community_pairs[i];
    PairWork& w = work[i];
    const CommunityProfile& hp = profiles.at(pair.hateful);

    {
      const auto& posts = by_community.at(pair.hateful);
      ThreadIndex index = build_thread_index(posts);
      ScoreMap scores = build_score_map(posts, store);
      ExtractionResult ex =
          extract_first_posts(posts, index, pair.hateful, *hp.ban_date, scores);
      w.hateful_events = std::move(ex.events);
    }
    {
      const auto& posts = by_community.at(pair.control);
      ThreadIndex index = build_thread_index(posts);
      ScoreMap scores = build_score_map(posts, store);
      ExtractionResult ex =
          extract_first_posts(posts, index, pair.control, end_of_data, scores);
      w.control_events =
          apply_simulated_ban(std::move(ex.events), *hp.ban_date, hp.p90_return);
    }
    match_one_community(pair.hateful, w.hateful_events, w);
    match_one_community(pair.control, w.control_events, w);
  });

  // deterministic merge
  std::string events_csv = event_csv_header();
  std::string pairs_csv = "community,kind,treated_user,control_user,distance\n";
  json skips = json::array();
  size_t excluded_missing = 0;
  for (size_t i = 0; i < work.size(); ++i) {
    for (const auto& ev : work[i].hateful_events) events_csv += event_to_csv(ev, "hateful");
    for (const auto& ev : work[i].control_events) events_csv += event_to_csv(ev, "control");
    pairs_csv += work[i].pairs_csv;
    for (const auto& s : work[i].skips) skips.push_back(s);
    excluded_missing += work[i].excluded_missing;
  }
  write_file((dir / "events.csv").string(), events_csv);
  write_file((dir / "pairs.csv").string(), pairs_csv);

  std::string cp_csv = "hateful,control,distance,ban_date,p90\n";
  for (const auto& pair : community_pairs) {
    const CommunityProfile& hp = profiles.at(pair.hateful);
    cp_csv += pair.hateful + "," + pair.control + "," + format_double(pair.distance) + "," +
              std::to_string(*hp.ban_date) + "," + std::to_string(hp.p90_return) + "\n";
  }
  write_file((dir / "community_pairs.csv").string(), cp_csv);

  std::string profiles_csv = "community,size,ban_date,p90_return,hateful\n";
  for (const auto& [name, p] : profiles) {
    profiles_csv += name + "," + std::to_string(p.size) + "," +
                    (p.ban_date ? std::to_string(*p.ban_date) : "") + "," +
                    std::to_string(p.p90_return) + "," + (p.hateful ? "true" : "false") + "\n";
  }
  write_file((dir / "profiles.csv").string(), profiles_csv);

  json report;
  report["hateful_communities"] = hateful_names.size();
  report["candidates"] = candidate_profiles.size();
  report["candidates_size_filtered"] = size_filtered;
  report["skipped_pools"] = skips;
  report["events_excluded_missing_covariates"] = excluded_missing;
  report["end_of_data"] = end_of_data;
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  ManifestBuilder manifest(config, Stage::cohort);
  manifest.add_input(posts_path);
  manifest.add_input(classes_path);
  manifest.add_input(config.ban_dates);
  manifest.add_input(config.match_candidates);
  manifest.add_input(config.score_cache);
  for (const char* name :
       {"events.csv", "pairs.csv", "community_pairs.csv", "profiles.csv", "report.json"}) {
    manifest.add_output((dir / name).string());
  }
  manifest.set_counter("community_pairs", community_pairs.size());
  manifest.write();
}

// ---------------------------------------------------------------------------
// stats

namespace {

struct PairRow {
  std::string community;
  PostKind kind;
  std::string treated_user;
  std::string control_user;
};

std::vector<PairRow> load_pairs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs table: " + path);
  std::vector<PairRow> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() < 5) throw DataError("pairs.csv: bad row: " + line);
    out.push_back({f[0], f[1] == "submission" ? PostKind::submission : PostKind::comment,
                   f[2], f[3]});
  }
  return out;
}

struct CommunityPairRow {
  std::string hateful;
  std::string control;
};

std::vector<CommunityPairRow> load_community_pairs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open community pairs: " + path);
  std::vector<CommunityPairRow> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() < 2) throw DataError("community_pairs.csv: bad row: " + line);
    out.push_back({f[0], f[1]});
  }
  return out;
}

json model_to_json(const EngagementModel& model, const std::vector<double>& vif_values) {
  json j;
  j["kind"] = to_string(model.kind);
  j["community_type"] = to_string(model.community_type);
  json beta, se;
  for (int k = 0; k < kEngagementCols; ++k) {
    beta[kEngagementColumnNames[k]] = model.beta[k];
    se[kEngagementColumnNames[k]] = model.se[k];
  }
  j["beta"] = beta;
  j["se"] = se;
  j["sigma2"] = model.sigma2;
  j["loglik"] = model.loglik;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["u"] = model.u;
  json vifs;
  for (size_t k = 0; k + 1 < static_cast<size_t>(kEngagementCols); ++k) {
    double v = vif_values[k];
    vifs[kEngagementColumnNames[k + 1]] =
        std::isinf(v) ? json("inf") : json(v);
  }
  j["vif"] = vifs;
  return j;
}

}  // namespace

void run_stats(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::stats);
  check_predecessor(config, Stage::cohort);
  fs::path cohort_dir = fs::path(config.output_dir) / "cohort";
  std::string events_path = (cohort_dir / "events.csv").string();
  std::string pairs_path = (cohort_dir / "pairs.csv").string();
  std::string cpairs_path = (cohort_dir / "community_pairs.csv").string();
  require_artifact(events_path, "cohort/events.csv");
  require_artifact(pairs_path, "cohort/pairs.csv");
  require_artifact(cpairs_path, "cohort/community_pairs.csv");

  LoadedEvents loaded = load_events_csv(events_path);
  std::vector<PairRow> pairs = load_pairs_csv(pairs_path);
  std::vector<CommunityPairRow> community_pairs = load_community_pairs_csv(cpairs_path);

  std::map<std::pair<std::string, std::string>, const FirstPostEvent*> by_key;
  for (const auto& ev : loaded.events) by_key[{ev.community, ev.user}] = &ev;

  // ERR per (community, kind) over the matched pairs
  struct ErrKey {
    std::string community;
    PostKind kind;
    bool operator<(const ErrKey& o) const {
      if (community != o.community) return community < o.community;
      return static_cast<int>(kind) < static_cast<int>(o.kind);
    }
  };
  struct ErrCounts {
    int64_t engaged_t = 0, engaged_c = 0, n = 0;
  };
  std::map<ErrKey, ErrCounts> counts;
  for (const auto& row : pairs) {
    auto t = by_key.find({row.community, row.treated_user});
    auto c = by_key.find({row.community, row.control_user});
    if (t == by_key.end() || c == by_key.end()) {
      throw DataError("pairs.csv references unknown event: " + row.community + "/" +
                      row.treated_user);
    }
    auto& cnt = counts[{row.community, row.kind}];
    cnt.engaged_t += t->second->engaged ? 1 : 0;
    cnt.engaged_c += c->second->engaged ? 1 : 0;
    cnt.n += 1;
  }
  std::map<ErrKey, ErrResult> errs;
  std::string err_csv = "community,kind,err,p_treated,p_control,n_treated,n_control,undefined\n";
  for (const auto& [key, cnt] : counts) {
    ErrResult r = err_from_counts(cnt.engaged_t, cnt.n, cnt.engaged_c, cnt.n);
    r.community = key.community;
    r.kind = key.kind;
    errs[key] = r;
    err_csv += key.community + "," + to_string(key.kind) + "," +
               (r.undefined ? "" : format_double(r.err)) + "," + format_double(r.p_treated) +
               "," + format_double(r.p_control) + "," + std::to_string(r.n_treated) + "," +
               std::to_string(r.n_control) + "," + (r.undefined ? "true" : "false") + "\n";
  }
  write_file((dir / "err_table.csv").string(), err_csv);

  // mean reply attributes per (community, kind) over scored first replies
  struct AttrMeans {
    double sentiment = 0, toxicity = 0, attack = 0;
    size_t n = 0;
  };
  std::map<ErrKey, AttrMeans> attrs;
  for (const auto& ev : loaded.events) {
    if (!ev.treated || !ev.first_reply || !ev.first_reply->scored) continue;
    auto& a = attrs[{ev.community, ev.kind}];
    a.sentiment += ev.first_reply->sentiment;
    a.toxicity += ev.first_reply->toxicity;
    a.attack += ev.first_reply->attack;
    a.n += 1;
  }
  for (auto& [key, a] : attrs) {
    if (a.n > 0) {
      a.sentiment /= static_cast<double>(a.n);
      a.toxicity /= static_cast<double>(a.n);
      a.attack /= static_cast<double>(a.n);
    }
  }

  // paired hateful-vs-control tests per kind: ERR and the three attributes
  std::string tests_csv = "name,kind,statistic,p_value,n,method\n";
  size_t excluded_undefined = 0;
  for (PostKind kind : {PostKind::comment, PostKind::submission}) {
    std::vector<double> err_diffs, sent_diffs, tox_diffs, att_diffs;
    for (const auto& cp : community_pairs) {
      auto h = errs.find({cp.hateful, kind});
      auto c = errs.find({cp.control, kind});
      if (h != errs.end() && c != errs.end() && !h->second.undefined &&
          !c->second.undefined) {
        err_diffs.push_back(h->second.err - c->second.err);
      } else {
        ++excluded_undefined;
      }
      auto ha = attrs.find({cp.hateful, kind});
      auto ca = attrs.find({cp.control, kind});
      if (ha != attrs.end() && ca != attrs.end() && ha->second.n > 0 && ca->second.n > 0) {
        sent_diffs.push_back(ha->second.sentiment - ca->second.sentiment);
        tox_diffs.push_back(ha->second.toxicity - ca->second.toxicity);
        att_diffs.push_back(ha->second.attack - ca->second.attack);
      }
    }
    auto emit = [&](const std::string& name, const std::vector<double>& diffs) {
      if (diffs.empty()) return;
      TestResult tr = wilcoxon_signed_rank(diffs).to_test_result();
      tests_csv += name + "," + to_string(kind) + "," + format_double(tr.statistic) + "," +
                   format_double(tr.p_value) + "," + std::to_string(tr.n) + "," + tr.method +
                   "\n";
    };
    emit("err_hateful_vs_control", err_diffs);
    emit("reply_sentiment_hateful_vs_control", sent_diffs);
    emit("reply_toxicity_hateful_vs_control", tox_diffs);
    emit("reply_attack_hateful_vs_control", att_diffs);
  }
  write_file((dir / "tests.csv").string(), tests_csv);

  // ERR vs mean reply attribute correlations across analysis communities
  std::string corr_csv = "kind,attribute,spearman_r,p_value,n\n";
  for (PostKind kind : {PostKind::comment, PostKind::submission}) {
    std::vector<double> xs_sent, xs_tox, xs_att, ys;
    for (const auto& [key, r] : errs) {
      if (key.kind != kind || r.undefined) continue;
      auto a = attrs.find(key);
      if (a == attrs.end() || a->second.n == 0) continue;
      ys.push_back(r.err);
      xs_sent.push_back(a->second.sentiment);
      xs_tox.push_back(a->second.toxicity);
      xs_att.push_back(a->second.attack);
    }
    auto emit = [&](const std::string& attr, const std::vector<double>& xs) {
      if (ys.size() < 3) return;
      try {
        TestResult tr = spearman(xs, ys);
        corr_csv += std::string(to_string(kind)) + "," + attr + "," +
                    format_double(tr.statistic) + "," + format_double(tr.p_value) + "," +
                    std::to_string(tr.n) + "\n";
      } catch (const DataError&) {
        // constant input: correlation undefined, skip the row
      }
    };
    emit("toxicity", xs_tox);
    emit("attack", xs_att);
    emit("sentiment", xs_sent);
  }
  write_file((dir / "correlations.csv").string(), corr_csv);

  // mixed models per (kind, community type), continuous and threshold modes
  struct FitSpec {
    PostKind kind;
    CommunityType type;
    const char* label;
  };
  const FitSpec fit_specs[] = {
      {PostKind::comment, CommunityType::hateful, "comment_hateful"},
      {PostKind::comment, CommunityType::non_hateful, "comment_nonhateful"},
      {PostKind::submission, CommunityType::hateful, "submission_hateful"},
      {PostKind::submission, CommunityType::non_hateful, "submission_nonhateful"},
  };

  json models = json::object();
  json threshold_models = json::object();
  std::string vif_csv = "kind,community_type,threshold_mode,column,vif\n";

  std::vector<std::pair<bool, size_t>> fit_tasks;  // (threshold_mode, spec index)
  for (size_t i = 0; i < 4; ++i) fit_tasks.emplace_back(false, i);
  for (size_t i = 0; i < 4; ++i) fit_tasks.emplace_back(true, i);
  std::vector<json> fit_results(fit_tasks.size());
  std::vector<std::string> fit_errors(fit_tasks.size());

  parallel_for(fit_tasks.size(), config.threads, [&](size_t task) {
    auto [threshold, spec_idx] = fit_tasks[task];
    const FitSpec& spec = fit_specs[spec_idx];
    std::vector<FirstPostEvent> subset;
    for (const auto& ev : loaded.events) {
      if (ev.kind != spec.kind) continue;
      bool hateful = loaded.community_hateful.at(ev.community);
      if ((spec.type == CommunityType::hateful) != hateful) continue;
      subset.push_back(ev);
    }
    if (subset.empty()) {
      fit_errors[task] = "no events";
      return;
    }
    DesignOptions design_options;
    design_options.threshold_mode = threshold;
    EngagementDesign design = build_engagement_design(std::move(subset), design_options);
    try {
      EngagementModel model = fit_mixed_logistic(design);
      model.kind = spec.kind;
      model.community_type = spec.type;
      std::vector<double> vifs = vif(design.X.rightCols(kEngagementCols - 1));
      fit_results[task] = model_to_json(model, vifs);
    } catch (const ConvergenceError& e) {
      fit_errors[task] = e.what();
    }
  });

  for (size_t task = 0; task < fit_tasks.size(); ++task) {
    auto [threshold, spec_idx] = fit_tasks[task];
    const FitSpec& spec = fit_specs[spec_idx];
    json& bucket = threshold ? threshold_models : models;
    if (!fit_errors[task].empty()) {
      bucket[spec.label] = {{"error", fit_errors[task]}};
      continue;
    }
    bucket[spec.label] = fit_results[task];
    for (auto& [col, v] : fit_results[task]["vif"].items()) {
      vif_csv += std::string(to_string(spec.kind)) + "," + to_string(spec.type) + "," +
                 (threshold ? "true" : "false") + "," + col + "," +
                 (v.is_string() ? v.get<std::string>() : format_double(v.get<double>())) + "\n";
    }
  }

  json model_report;
  model_report["models"] = models;
  model_report["threshold_models"] = threshold_models;
  write_file((dir / "model_report.json").string(), model_report.dump(2) + "\n");
  write_file((dir / "vif.csv").string(), vif_csv);

  json report;
  report["err_rows"] = errs.size();
  report["pairs_excluded_undefined_err"] = excluded_undefined;
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  ManifestBuilder manifest(config, Stage::stats);
  manifest.add_input(events_path);
  manifest.add_input(pairs_path);
  manifest.add_input(cpairs_path);
  for (const char* name : {"err_table.csv", "tests.csv", "correlations.csv",
                           "model_report.json", "vif.csv", "report.json"}) {
    manifest.add_output((dir / name).string());
  }
  manifest.write();
}

// ---------------------------------------------------------------------------
// simulate

namespace {

EngagementModel model_from_json(const json& j) {
  if (j.contains("error")) {
    throw ConvergenceError("simulate: required model failed to fit: " +
                           j["error"].get<std::string>());
  }
  EngagementModel m;
  m.kind = j.at("kind").get<std::string>() == "submission" ? PostKind::submission
                                                           : PostKind::comment;
  m.community_type = j.at("community_type").get<std::string>() == "hateful"
                         ? CommunityType::hateful
                         : CommunityType::non_hateful;
  m.beta.resize(kEngagementCols);
  m.se.resize(kEngagementCols);
  for (int k = 0; k < kEngagementCols; ++k) {
    m.beta[k] = j.at("beta").at(kEngagementColumnNames[k]).get<double>();
    m.se[k] = j.at("se").at(kEngagementColumnNames[k]).get<double>();
  }
  m.sigma2 = j.at("sigma2").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.loglik = j.at("loglik").get<double>();
  for (auto& [name, u] : j.at("u").items()) m.u[name] = u.get<double>();
  return m;
}

}  // namespace

void run_simulate(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::simulate);
  check_predecessor(config, Stage::cohort);
  check_predecessor(config, Stage::stats);
  std::string events_path = (fs::path(config.output_dir) / "cohort" / "events.csv").string();
  std::string models_path =
      (fs::path(config.output_dir) / "stats" / "model_report.json").string();
  require_artifact(events_path, "cohort/events.csv");
  require_artifact(models_path, "stats/model_report.json");

  LoadedEvents loaded = load_events_csv(events_path);
  json model_report = json::parse(read_file(models_path));
  const json& models_json = model_report.at("models");

  std::map<std::string, EngagementModel> models;
  for (const char* label :
       {"comment_hateful", "comment_nonhateful", "submission_hateful", "submission_nonhateful"}) {
    if (models_json.contains(label) && !models_json.at(label).contains("error")) {
      models[label] = model_from_json(models_json.at(label));
    }
  }
  auto models_for = [&](bool hateful) {
    KindModels km;
    std::string suffix = hateful ? "_hateful" : "_nonhateful";
    if (auto it = models.find("comment" + suffix); it != models.end()) km.comment = &it->second;
    if (auto it = models.find("submission" + suffix); it != models.end()) {
      km.submission = &it->second;
    }
    return km;
  };

  std::map<std::string, std::vector<FirstPostEvent>> events_by_community;
  for (const auto& ev : loaded.events) events_by_community[ev.community].push_back(ev);

  std::vector<std::string> communities;
  for (const auto& [name, _] : events_by_community) communities.push_back(name);

  struct SimRow {
    std::string curves_csv;
    double percent_sum = 0.0;
    int percent_n = 0;
    int undefined = 0;
  };
  std::vector<SimRow> rows(communities.size());

  parallel_for(communities.size(), config.threads, [&](size_t i) {
    const std::string& community = communities[i];
    const auto& events = events_by_community.at(community);
    bool hateful = loaded.community_hateful.at(community);
    KindModels km = models_for(hateful);
    SimRow& row = rows[i];
    for (int rep = 0; rep < config.replications; ++rep) {
      uint64_t seed = config.simulate_seed + static_cast<uint64_t>(rep);
      GrowthCurve base = simulate_growth(km, events, Scenario::default_scenario, seed);
      GrowthCurve nicer = simulate_growth(km, events, Scenario::nicer, seed);
      if (rep == 0) {
        for (const GrowthCurve* curve : {&base, &nicer}) {
          for (const auto& pt : curve->points) {
            row.curves_csv += community + "," + to_string(curve->scenario) + "," +
                              std::to_string(pt.timestamp) + "," +
                              std::to_string(pt.cumulative) + "," + std::to_string(seed) + "\n";
          }
        }
      }
      if (auto pct = percent_increase(base, nicer)) {
        row.percent_sum += *pct;
        row.percent_n += 1;
      } else {
        row.undefined += 1;
      }
    }
  });

  std::string curves_csv = "community,scenario,timestamp,cumulative_count,seed\n";
  std::string summary_csv = "community,type,percent_increase\n";
  int undefined_total = 0;
  for (size_t i = 0; i < communities.size(); ++i) {
    curves_csv += rows[i].curves_csv;
    undefined_total += rows[i].undefined;
    if (rows[i].percent_n > 0) {
      summary_csv += communities[i] + "," +
                     (loaded.community_hateful.at(communities[i]) ? "hateful" : "non-hateful") +
                     "," + format_double(rows[i].percent_sum / rows[i].percent_n) + "\n";
    }
  }
  write_file((dir / "growth_curves.csv").string(), curves_csv);
  write_file((dir / "summary.csv").string(), summary_csv);

  json report;
  report["replications"] = config.replications;
  report["undefined_percent_increases"] = undefined_total;
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  ManifestBuilder manifest(config, Stage::simulate);
  manifest.add_input(events_path);
  manifest.add_input(models_path);
  for (const char* name : {"growth_curves.csv", "summary.csv", "report.json"}) {
    manifest.add_output((dir / name).string());
  }
  manifest.write();
}

// ---------------------------------------------------------------------------
// report

void run_report(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::report);
  for (Stage s : {Stage::ingest, Stage::detect, Stage::score, Stage::cohort, Stage::stats,
                  Stage::simulate}) {
    check_predecessor(config, s);
  }

  fs::path out(config.output_dir);
  json report;

  // ERR summary by community type
  {
    LoadedEvents loaded = load_events_csv((out / "cohort" / "events.csv").string());
    std::ifstream in((out / "stats" / "err_table.csv").string());
    if (!in) throw MissingArtifactError("stats/err_table.csv");
    std::string line;
    bool header = true;
    double sums[2][2] = {{0, 0}, {0, 0}};
    int ns[2][2] = {{0, 0}, {0, 0}};
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      auto f = split_csv_line(line);
      if (f.size() < 8 || f[7] == "true") continue;
      bool hateful = loaded.community_hateful.at(f[0]);
      int kind = f[1] == "submission" ? 1 : 0;
      sums[hateful ? 0 : 1][kind] += parse_double(f[2]).value();
      ns[hateful ? 0 : 1][kind] += 1;
    }
    json errj;
    const char* type_names[2] = {"hateful", "non-hateful"};
    const char* kind_names[2] = {"comment", "submission"};
    for (int t = 0; t < 2; ++t) {
      for (int k = 0; k < 2; ++k) {
        if (ns[t][k] > 0) {
          errj[std::string("mean_err_") + type_names[t] + "_" + kind_names[k]] =
              sums[t][k] / ns[t][k];
        }
      }
    }
    report["err"] = errj;
  }

  report["tests_csv"] = "stats/tests.csv";
  report["correlations_csv"] = "stats/correlations.csv";
  report["model_report"] = json::parse(read_file((out / "stats" / "model_report.json").string()));

  // growth summary by type
  {
    std::ifstream in((out / "simulate" / "summary.csv").string());
    if (!in) throw MissingArtifactError("simulate/summary.csv");
    std::string line;
    bool header = true;
    double sum_h = 0, sum_n = 0;
    int n_h = 0, n_n = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      auto f = split_csv_line(line);
      if (f.size() < 3) continue;
      double v = parse_double(f[2]).value();
      if (f[1] == "hateful") {
        sum_h += v;
        ++n_h;
      } else {
        sum_n += v;
        ++n_n;
      }
    }
    json growth;
    if (n_h > 0) growth["mean_percent_increase_hateful"] = sum_h / n_h;
    if (n_n > 0) growth["mean_percent_increase_nonhateful"] = sum_n / n_n;
    report["growth"] = growth;
  }

  // substitution sensitivity summary
  {
    std::ifstream in((out / "score" / "substitution.csv").string());
    if (!in) throw MissingArtifactError("score/substitution.csv");
    std::string line;
    bool header = true;
    double max_shift = 0.0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      auto f = split_csv_line(line);
      if (f.size() < 8) continue;
      max_shift = std::max(max_shift, std::abs(parse_double(f[2]).value() -
                                               parse_double(f[3]).value()));
      max_shift = std::max(max_shift, std::abs(parse_double(f[4]).value() -
                                               parse_double(f[5]).value()));
    }
    report["substitution"] = {{"max_mean_attribute_shift", max_shift},
                              {"detail_csv", "score/substitution.csv"}};
  }

  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  // global manifest: every artifact from every stage, with content hashes
  json global = json::object();
  for (Stage s : {Stage::synth, Stage::ingest, Stage::detect, Stage::score, Stage::cohort,
                  Stage::stats, Stage::simulate}) {
    fs::path manifest_path = out / to_string(s) / "manifest.json";
    if (!fs::exists(manifest_path)) continue;
    json m = json::parse(read_file(manifest_path.string()));
    for (auto& [path, hash] : m.at("outputs").items()) global[path] = hash;
    global[std::string(to_string(s)) + "/manifest.json"] =
        sha256_file(manifest_path.string());
  }
  global["report/report.json"] = sha256_file((dir / "report.json").string());
  write_file((dir / "global_manifest.json").string(), global.dump(2) + "\n");

  ManifestBuilder manifest(config, Stage::report);
  manifest.add_output((dir / "report.json").string());
  manifest.add_output((dir / "global_manifest.json").string());
  manifest.write();
}

}  // namespace firstreply::detail
