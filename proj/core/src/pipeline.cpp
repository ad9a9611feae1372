#include "firstreply/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>

#include "firstreply/annotations.hpp"
#include "firstreply/archive.hpp"
#include "firstreply/attributes.hpp"
#include "firstreply/errors.hpp"
#include "firstreply/hashing.hpp"
#include "firstreply/hate_lexicon.hpp"
#include "firstreply/io_util.hpp"
#include "firstreply/remote_scorer.hpp"
#include "firstreply/rng.hpp"
#include "firstreply/sage.hpp"
#include "firstreply/score_store.hpp"
#include "firstreply/sentiment.hpp"
#include "firstreply/synth.hpp"
#include "firstreply/text.hpp"
#include "pipeline_internal.hpp"

namespace firstreply {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::synth: return "synth";
    case Stage::ingest: return "ingest";
    case Stage::detect: return "detect";
    case Stage::score: return "score";
    case Stage::cohort: return "cohort";
    case Stage::stats: return "stats";
    case Stage::simulate: return "simulate";
    case Stage::report: return "report";
  }
  return "?";
}

Stage stage_from_string(const std::string& name) {
  for (Stage s : {Stage::synth, Stage::ingest, Stage::detect, Stage::score, Stage::cohort,
                  Stage::stats, Stage::simulate, Stage::report}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown stage: " + name);
}

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
  if (count == 0) return;
  int workers = std::min<int>(threads, static_cast<int>(count));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= count) return;
          fn(i);
        }
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void run_stage(Stage stage, const PipelineConfig& config) {
  switch (stage) {
    case Stage::synth: detail::run_synth(config); return;
    case Stage::ingest: detail::run_ingest(config); return;
    case Stage::detect: detail::run_detect(config); return;
    case Stage::score: detail::run_score(config); return;
    case Stage::cohort: detail::run_cohort(config); return;
    case Stage::stats: detail::run_stats(config); return;
    case Stage::simulate: detail::run_simulate(config); return;
    case Stage::report: detail::run_report(config); return;
  }
}

void run_all(const PipelineConfig& config) {
  for (Stage s : {Stage::ingest, Stage::detect, Stage::score, Stage::cohort, Stage::stats,
                  Stage::simulate, Stage::report}) {
    run_stage(s, config);
  }
}

namespace detail {

fs::path stage_dir(const PipelineConfig& config, Stage stage) {
  fs::path dir = fs::path(config.output_dir) / to_string(stage);
  fs::create_directories(dir);
  return dir;
}

std::string config_hash(const PipelineConfig& config) {
  std::string canonical;
  for (const auto& [k, v] : config.raw.entries()) {
    if (k == "threads") continue;
    canonical += k + "=" + v + "\n";
  }
  return sha256_hex(canonical);
}

ManifestBuilder::ManifestBuilder(const PipelineConfig& config, Stage stage)
    : config_(config), stage_(stage) {
  inputs_ = json::object();
  outputs_ = json::object();
  counters_ = json::object();
}

std::string ManifestBuilder::relativize(const std::string& path) const {
  fs::path p(path);
  fs::path base(config_.output_dir);
  auto rel = fs::relative(p, base);
  if (!rel.empty() && rel.native().rfind("..", 0) != 0) return rel.string();
  return path;  // external input: keep verbatim
}

void ManifestBuilder::add_input(const std::string& path) {
  inputs_[relativize(path)] = sha256_file(path);
}

void ManifestBuilder::add_output(const std::string& path) {
  outputs_[relativize(path)] = sha256_file(path);
}

void ManifestBuilder::set_counter(const std::string& key, const json& value) {
  counters_[key] = value;
}

void ManifestBuilder::write() {
  json manifest;
  manifest["stage"] = to_string(stage_);
  manifest["config_hash"] = config_hash(config_);
  manifest["inputs"] = inputs_;
  manifest["outputs"] = outputs_;
  manifest["counters"] = counters_;
  write_file((stage_dir(config_, stage_) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void require_artifact(const std::string& path, const std::string& label) {
  if (!fs::exists(path)) throw MissingArtifactError(label);
}

void check_predecessor(const PipelineConfig& config, Stage predecessor) {
  fs::path manifest_path =
      fs::path(config.output_dir) / to_string(predecessor) / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw MissingArtifactError(std::string(to_string(predecessor)) +
                               "/manifest.json (run the '" + to_string(predecessor) +
                               "' stage first)");
  }
  json manifest = json::parse(read_file(manifest_path.string()));
  std::string recorded = manifest.value("config_hash", "");
  std::string current = config_hash(config);
  if (recorded != current) {
    throw ConfigError(std::string("stage '") + to_string(predecessor) +
                      "' ran under a different configuration (hash " + recorded.substr(0, 12) +
                      "... vs current " + current.substr(0, 12) +
                      "...); re-run it before continuing");
  }
}

std::map<std::string, Seconds> load_ban_dates(const std::string& path) {
  std::map<std::string, Seconds> out;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ban-date table: " + path);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() < 2) throw DataError("ban-date row needs community,ban_date: " + line);
    auto v = parse_int(fields[1]);
    if (!v) throw DataError("ban-date row has non-integer date: " + line);
    out[fields[0]] = *v;
  }
  return out;
}

std::vector<std::string> load_name_list(const std::string& path) {
  std::vector<std::string> out;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open list: " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(t);
  }
  return out;
}

std::map<std::string, std::vector<Post>> group_by_community(std::vector<Post> posts) {
  std::map<std::string, std::vector<Post>> out;
  for (auto& p : posts) out[p.community].push_back(std::move(p));
  return out;
}

// ---------------------------------------------------------------------------
// synth

void run_synth(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::synth);

  SynthParams params = SynthParams::defaults();
  params.seed = config.synth_seed;
  params.hate_word_injection_rate = config.synth_injection_rate;

  Rng ban_rng = Rng::keyed(params.seed, "synth-ban-dates");
  const Seconds span = params.timeline_end - params.timeline_start;
  auto sized = [&](int i, int n) {
    // deterministic size spread so community matching has something to do
    double scale = 0.7 + (n > 1 ? 0.6 * static_cast<double>(i) / (n - 1) : 0.0);
    return std::max<int64_t>(50, static_cast<int64_t>(config.synth_users * scale));
  };
  for (int i = 0; i < config.synth_hateful; ++i) {
    SynthCommunity c;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "h%02d", i);
    c.name = buf;
    c.type = CommunityType::hateful;
    c.user_count = sized(i, config.synth_hateful);
    c.ban_date = params.timeline_start + static_cast<Seconds>(span * 0.7) +
                 static_cast<Seconds>(ban_rng.next_below(static_cast<uint64_t>(span * 0.25)));
    params.communities.push_back(c);
  }
  for (int i = 0; i < config.synth_nonhateful; ++i) {
    SynthCommunity c;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%02d", i);
    c.name = buf;
    c.type = CommunityType::non_hateful;
    c.user_count = sized(i, config.synth_nonhateful);
    params.communities.push_back(c);
  }

  SynthCorpus corpus = generate_corpus(params);

  std::string archive_path = (dir / "archive.ndjson").string();
  std::string background_path = (dir / "background.ndjson").string();
  write_archive_file(archive_path, corpus.posts);
  write_archive_file(background_path, corpus.background_posts);
  write_file((dir / "truth.json").string(), truth_to_json(corpus.truth) + "\n");

  {
    std::string csv = "word";
    for (size_t r = 0; r < corpus.annotations.ratings.front().size(); ++r) {
      csv += ",rater" + std::to_string(r + 1);
    }
    csv += "\n";
    for (size_t i = 0; i < corpus.annotations.words.size(); ++i) {
      csv += corpus.annotations.words[i];
      for (int v : corpus.annotations.ratings[i]) csv += "," + std::to_string(v);
      csv += "\n";
    }
    write_file((dir / "annotations.csv").string(), csv);
  }
  {
    std::string tsv;
    for (const auto& [word, repl] : corpus.replacements) {
      tsv += word + "\t" + repl + "\tsynthetic\n";
    }
    write_file((dir / "replacements.tsv").string(), tsv);
  }
  {
    std::string csv = "community,ban_date\n";
    for (const auto& c : params.communities) {
      if (c.ban_date) csv += c.name + "," + std::to_string(*c.ban_date) + "\n";
    }
    write_file((dir / "ban_dates.csv").string(), csv);
  }
  {
    // detect candidates: the banned communities plus two benign decoys
    std::string detect_list;
    for (const auto& c : params.communities) {
      if (c.type == CommunityType::hateful) detect_list += c.name + "\n";
    }
    int decoys = 0;
    for (const auto& c : params.communities) {
      if (c.type == CommunityType::non_hateful && decoys < 2) {
        detect_list += c.name + "\n";
        ++decoys;
      }
    }
    write_file((dir / "detect_candidates.txt").string(), detect_list);

    std::string match_list;
    for (const auto& c : params.communities) {
      if (c.type == CommunityType::non_hateful) match_list += c.name + "\n";
    }
    write_file((dir / "match_candidates.txt").string(), match_list);
  }

  ManifestBuilder manifest(config, Stage::synth);
  for (const char* name : {"archive.ndjson", "background.ndjson", "truth.json",
                           "annotations.csv", "replacements.tsv", "ban_dates.csv",
                           "detect_candidates.txt", "match_candidates.txt"}) {
    manifest.add_output((dir / name).string());
  }
  manifest.set_counter("posts", corpus.posts.size());
  manifest.set_counter("communities", params.communities.size());
  manifest.write();
}

// ---------------------------------------------------------------------------
// ingest

void run_ingest(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::ingest);
  require_artifact(config.archive, config.archive);

  ParseResult parsed = parse_archive_file(config.archive);
  BotFilter bots = load_bot_filter(config.bot_patterns, config.bot_blocklist);
  size_t before = parsed.posts.size();
  std::vector<Post> posts = filter_bots(std::move(parsed.posts), bots);
  size_t bot_removed = before - posts.size();

  std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
    if (a.community != b.community) return a.community < b.community;
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.id < b.id;
  });

  Seconds end_of_data = 0;
  json community_counts = json::object();
  for (const auto& p : posts) {
    end_of_data = std::max(end_of_data, p.created_at);
    community_counts[p.community] = community_counts.value(p.community, 0) + 1;
  }

  std::string posts_path = (dir / "posts.ndjson").string();
  write_archive_file(posts_path, posts);

  json report;
  report["total_lines"] = parsed.total_lines;
  report["malformed"] = parsed.malformed;
  report["bot_removed"] = bot_removed;
  report["posts"] = posts.size();
  report["end_of_data"] = end_of_data;
  report["communities"] = community_counts;
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  ManifestBuilder manifest(config, Stage::ingest);
  manifest.add_input(config.archive);
  manifest.add_input(config.bot_patterns);
  manifest.add_input(config.bot_blocklist);
  manifest.add_output(posts_path);
  manifest.add_output((dir / "report.json").string());
  manifest.set_counter("malformed", parsed.malformed);
  manifest.set_counter("bot_removed", bot_removed);
  manifest.write();
}

// ---------------------------------------------------------------------------
// detect

void run_detect(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::detect);
  check_predecessor(config, Stage::ingest);
  std::string posts_path = (fs::path(config.output_dir) / "ingest" / "posts.ndjson").string();
  require_artifact(posts_path, "ingest/posts.ndjson");
  require_artifact(config.background_archive, config.background_archive);
  require_artifact(config.annotations, config.annotations);
  require_artifact(config.replacements, config.replacements);
  require_artifact(config.detect_candidates, config.detect_candidates);

  auto by_community = group_by_community(parse_archive_file(posts_path).posts);
  std::vector<std::string> candidates = load_name_list(config.detect_candidates);

  std::vector<std::string> background_bodies;
  for (const auto& p : parse_archive_file(config.background_archive).posts) {
    if (!p.body.empty()) background_bodies.push_back(p.body);
  }
  WordCounts background_counts = count_vocabulary(background_bodies, 1);

  AnnotationSheet sheet = load_annotation_sheet(config.annotations);
  AnnotationAggregate aggregate = aggregate_annotations(sheet);

  // hate lexicon: annotated hate words joined with the replacement table
  std::map<std::string, std::string> replacements;
  for (const auto& line : split(read_file(config.replacements), '\n')) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() >= 2) replacements[to_lower(trim(fields[0]))] = trim(fields[1]);
  }
  HateLexicon lexicon;
  size_t defaulted = 0;
  for (const auto& word : aggregate.hate_words) {
    HateLexiconEntry entry;
    auto it = replacements.find(word);
    if (it != replacements.end()) {
      entry.replacement = it->second;
      entry.note = "annotated";
    } else {
      entry.replacement = "person";
      entry.note = "annotated;default-replacement";
      ++defaulted;
    }
    lexicon.entries[word] = entry;
  }
  SentimentLexicon sentiment_lexicon = load_sentiment_lexicon(
      config.sentiment_lexicon, config.sentiment_boosters, config.sentiment_negations);
  validate_replacements(lexicon, sentiment_lexicon.word_set());
  save_hate_lexicon((dir / "hate_lexicon.tsv").string(), lexicon);

  struct DetectRow {
    std::string community;
    int hate_word_count = 0;
    bool hateful = false;
    bool skipped = false;
  };
  std::vector<DetectRow> rows(candidates.size());
  std::vector<std::string> sage_csvs(candidates.size());

  parallel_for(candidates.size(), config.threads, [&](size_t i) {
    DetectRow row;
    row.community = candidates[i];
    auto it = by_community.find(candidates[i]);
    if (it == by_community.end()) {
      row.skipped = true;
      rows[i] = row;
      return;
    }
    std::vector<std::string> bodies;
    for (const auto& p : it->second) {
      if (!p.body.empty()) bodies.push_back(p.body);
    }
    WordCounts target = count_vocabulary(bodies, config.sage_min_count);
    if (target.empty()) {
      row.skipped = true;
      rows[i] = row;
      return;
    }
    SageModel model = fit_sage(target, background_counts, config.sage_lambda);
    std::vector<std::string> top = top_distinctive_words(model, config.sage_top_k);
    for (const auto& w : top) {
      if (aggregate.hate_words.count(w)) ++row.hate_word_count;
    }
    row.hateful = classify_community(row.hate_word_count);
    rows[i] = row;

    // full eta report, sorted descending, alphabetical on ties
    std::vector<size_t> order(model.vocabulary.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (model.eta[a] != model.eta[b]) return model.eta[a] > model.eta[b];
      return model.vocabulary[a] < model.vocabulary[b];
    });
    std::string csv = "word,eta\n";
    for (size_t k : order) {
      csv += model.vocabulary[k] + "," + format_double(model.eta[k]) + "\n";
    }
    sage_csvs[i] = csv;
  });

  ManifestBuilder manifest(config, Stage::detect);
  std::string communities_csv = "community,hate_word_count,hateful\n";
  json skipped = json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.skipped) {
      skipped.push_back(row.community);
      continue;
    }
    communities_csv += row.community + "," + std::to_string(row.hate_word_count) + "," +
                       (row.hateful ? "true" : "false") + "\n";
    std::string sage_path = (dir / ("sage_" + row.community + ".csv")).string();
    write_file(sage_path, sage_csvs[i]);
    manifest.add_output(sage_path);
  }
  write_file((dir / "communities.csv").string(), communities_csv);

  json report;
  report["fleiss_kappa"] = aggregate.fleiss_kappa;
  report["hate_words"] = aggregate.hate_words.size();
  report["default_replacements"] = defaulted;
  report["skipped_candidates"] = skipped;
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  manifest.add_input(posts_path);
  manifest.add_input(config.background_archive);
  manifest.add_input(config.annotations);
  manifest.add_input(config.replacements);
  manifest.add_input(config.detect_candidates);
  manifest.add_output((dir / "hate_lexicon.tsv").string());
  manifest.add_output((dir / "communities.csv").string());
  manifest.add_output((dir / "report.json").string());
  manifest.set_counter("fleiss_kappa", aggregate.fleiss_kappa);
  manifest.write();
}

// ---------------------------------------------------------------------------
// score

namespace {

struct TextToScore {
  std::string post_id;
  std::string community;
  std::string body;
  bool is_reply = false;
};

}  // namespace

void run_score(const PipelineConfig& config) {
  fs::path dir = stage_dir(config, Stage::score);
  check_predecessor(config, Stage::ingest);
  check_predecessor(config, Stage::detect);
  std::string posts_path = (fs::path(config.output_dir) / "ingest" / "posts.ndjson").string();
  std::string lexicon_path =
      (fs::path(config.output_dir) / "detect" / "hate_lexicon.tsv").string();
  require_artifact(posts_path, "ingest/posts.ndjson");
  require_artifact(lexicon_path, "detect/hate_lexicon.tsv");

  auto by_community = group_by_community(parse_archive_file(posts_path).posts);
  HateLexicon hate_lexicon = load_hate_lexicon(lexicon_path);
  SentimentLexicon sentiment_lexicon = load_sentiment_lexicon(
      config.sentiment_lexicon, config.sentiment_boosters, config.sentiment_negations);

  // the posts that need scores: first posts (valence) and first replies
  std::vector<TextToScore> texts;
  {
    ScoreMap empty;
    for (const auto& [community, posts] : by_community) {
      ThreadIndex index = build_thread_index(posts);
      ExtractionResult extraction = extract_first_posts(
          posts, index, community, std::numeric_limits<Seconds>::max(), empty);
      std::map<std::string, size_t> by_id;
      for (size_t i = 0; i < posts.size(); ++i) by_id[posts[i].id] = i;
      for (const auto& ev : extraction.events) {
        const Post& fp = posts[by_id.at(ev.post_id)];
        if (!fp.body.empty()) texts.push_back({fp.id, community, fp.body, false});
        if (ev.first_reply) {
          const Post& reply = posts[by_id.at(ev.first_reply->reply_post_id)];
          if (!reply.body.empty()) texts.push_back({reply.id, community, reply.body, true});
        }
      }
    }
  }

  ScoreStore store(config.score_cache);
  std::unique_ptr<AttributeScorer> scorer;
  StubLexicons stub_lexicons = load_stub_lexicons(config.stub_toxicity, config.stub_attack);
  RemoteScorer* remote = nullptr;
  if (config.scorer == "remote") {
    RemoteScorerConfig rc;
    rc.endpoint = config.endpoint;
    const char* token = std::getenv(config.credentials_env.c_str());
    rc.credentials = token ? token : "";
    rc.rate_limit = config.rate_limit;
    auto owner = std::make_unique<RemoteScorer>(rc);
    remote = owner.get();
    scorer = std::move(owner);
  } else {
    scorer = std::make_unique<StubScorer>(stub_lexicons);
  }

  size_t cache_hits = 0, computed = 0;
  auto score_text = [&](const std::string& body) -> StoredScores {
    std::string hash = ScoreStore::hash_text(body);
    if (auto hit = store.lookup(hash)) {
      ++cache_hits;
      return *hit;
    }
    StoredScores s;
    AttributeScores attrs = scorer->score(body);
    s.toxicity = attrs.toxicity;
    s.attack = attrs.attack;
    s.sentiment = sentiment(body, sentiment_lexicon);
    store.put(hash, s);
    ++computed;
    return s;
  };

  // original scores (order fixed by the sorted community map)
  for (const auto& t : texts) score_text(t.body);

  // substitution sensitivity over replies, by community
  struct SubstitutionRow {
    size_t n = 0;
    double tox = 0, tox_sub = 0, att = 0, att_sub = 0, sent = 0, sent_sub = 0;
  };
  std::map<std::string, SubstitutionRow> substitution;
  for (const auto& t : texts) {
    if (!t.is_reply) continue;
    StoredScores original = score_text(t.body);
    StoredScores substituted = score_text(substitute_hate_words(t.body, hate_lexicon));
    auto& row = substitution[t.community];
    row.n += 1;
    row.tox += original.toxicity;
    row.att += original.attack;
    row.sent += original.sentiment;
    row.tox_sub += substituted.toxicity;
    row.att_sub += substituted.attack;
    row.sent_sub += substituted.sentiment;
  }
  std::string sub_csv =
      "community,n_replies,mean_toxicity,mean_toxicity_substituted,mean_attack,"
      "mean_attack_substituted,mean_sentiment,mean_sentiment_substituted\n";
  for (const auto& [community, row] : substitution) {
    double n = static_cast<double>(row.n);
    sub_csv += community + "," + std::to_string(row.n) + "," + format_double(row.tox / n) +
               "," + format_double(row.tox_sub / n) + "," + format_double(row.att / n) + "," +
               format_double(row.att_sub / n) + "," + format_double(row.sent / n) + "," +
               format_double(row.sent_sub / n) + "\n";
  }
  write_file((dir / "substitution.csv").string(), sub_csv);

  json report;
  report["texts"] = texts.size();
  report["cache_hits"] = cache_hits;
  report["computed"] = computed;
  report["scorer"] = scorer->name();
  report["network_calls"] = remote ? remote->network_calls() : 0;
  write_file((dir / "report.json").string(), report.dump(2) + "\n");

  ManifestBuilder manifest(config, Stage::score);
  manifest.add_input(posts_path);
  manifest.add_input(lexicon_path);
  manifest.add_output((dir / "substitution.csv").string());
  manifest.add_output((dir / "report.json").string());
  manifest.add_output(config.score_cache);
  manifest.set_counter("cache_hits", cache_hits);
  manifest.set_counter("computed", computed);
  manifest.write();
}

}  // namespace detail
}  // namespace firstreply
