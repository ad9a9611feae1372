#include "firstreply/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "firstreply/errors.hpp"
#include "firstreply/hashing.hpp"
#include "firstreply/io_util.hpp"

namespace firstreply {

namespace {

// strips a trailing comment, respecting double quotes
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    return value.substr(1, value.size() - 2);
  }
  return value;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("config line " + std::to_string(lineno) +
                                             ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = unquote(trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    config.values_[key] = value;
  }
  return config;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) {
    throw ConfigError("missing required config key: " + key);
  }
  return it->second;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_int(it->second);
  if (!v) throw ConfigError("config key " + key + " is not an integer: " + it->second);
  return *v;
}

int64_t Config::require_int(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required config key: " + key);
  return get_int(key, 0);
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_double(it->second);
  if (!v) throw ConfigError("config key " + key + " is not a number: " + it->second);
  return *v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + it->second);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string Config::hash() const { return sha256_hex(canonical()); }

PipelineConfig PipelineConfig::resolve(const Config& config, bool for_synth_only) {
  PipelineConfig pc;
  pc.raw = config;
  pc.output_dir = config.get_string("output_dir", "out");
  pc.threads = static_cast<int>(config.get_int("threads", 1));
  if (pc.threads < 1) throw ConfigError("threads must be >= 1");

  pc.archive = config.get_string("io.archive", pc.output_dir + "/synth/archive.ndjson");
  pc.background_archive =
      config.get_string("io.background_archive", pc.output_dir + "/synth/background.ndjson");
  pc.bot_patterns = config.get_string("io.bot_patterns", "data/bot_patterns.txt");
  pc.bot_blocklist = config.get_string("io.bot_blocklist", "data/bot_blocklist.txt");
  pc.sentiment_lexicon =
      config.get_string("io.sentiment_lexicon", "data/sentiment_lexicon.tsv");
  pc.sentiment_boosters =
      config.get_string("io.sentiment_boosters", "data/sentiment_boosters.tsv");
  pc.sentiment_negations =
      config.get_string("io.sentiment_negations", "data/sentiment_negations.txt");
  pc.stub_toxicity = config.get_string("io.stub_toxicity", "data/stub_toxicity.tsv");
  pc.stub_attack = config.get_string("io.stub_attack", "data/stub_attack.tsv");
  pc.annotations = config.get_string("io.annotations", pc.output_dir + "/synth/annotations.csv");
  pc.replacements =
      config.get_string("io.replacements", pc.output_dir + "/synth/replacements.tsv");
  pc.ban_dates = config.get_string("io.ban_dates", pc.output_dir + "/synth/ban_dates.csv");
  pc.detect_candidates =
      config.get_string("io.detect_candidates", pc.output_dir + "/synth/detect_candidates.txt");
  pc.match_candidates =
      config.get_string("io.match_candidates", pc.output_dir + "/synth/match_candidates.txt");

  pc.sage_lambda = config.get_double("detect.lambda", 1.0);
  pc.sage_top_k = static_cast<int>(config.get_int("detect.top_k", 100));
  pc.sage_min_count = config.get_int("detect.min_count", 10);
  if (pc.sage_lambda < 0) throw ConfigError("detect.lambda must be nonnegative");
  if (pc.sage_top_k < 1) throw ConfigError("detect.top_k must be >= 1");

  pc.scorer = config.get_string("score.scorer", "stub");
  if (pc.scorer != "stub" && pc.scorer != "remote") {
    throw ConfigError("score.scorer must be 'stub' or 'remote', got: " + pc.scorer);
  }
  pc.endpoint = config.get_string("score.endpoint", "");
  if (pc.scorer == "remote" && pc.endpoint.empty()) {
    throw ConfigError("score.scorer = remote requires score.endpoint");
  }
  pc.credentials_env = config.get_string("score.credentials_env", "FIRSTREPLY_SCORER_TOKEN");
  pc.rate_limit = config.get_double("score.rate_limit", 10.0);
  pc.score_cache = config.get_string("score.cache", pc.output_dir + "/score/cache.tsv");

  // seeds are explicit: no wall-clock fallbacks anywhere
  pc.cohort_seed = static_cast<uint64_t>(config.require_int("cohort.seed"));
  pc.pool_cap = config.get_int("cohort.pool_cap", 30000);
  pc.candidate_min_members = config.get_int("cohort.candidate_min_members", 10000);
  pc.candidate_max_members = config.get_int("cohort.candidate_max_members", 2000000);
  if (config.has("cohort.end_of_data")) pc.end_of_data = config.get_int("cohort.end_of_data", 0);

  pc.simulate_seed = static_cast<uint64_t>(config.require_int("simulate.seed"));
  pc.replications = static_cast<int>(config.get_int("simulate.replications", 100));
  if (pc.replications < 1) throw ConfigError("simulate.replications must be >= 1");

  pc.synth_seed = static_cast<uint64_t>(config.get_int("synth.seed", 1));
  pc.synth_hateful = static_cast<int>(config.get_int("synth.hateful_communities", 10));
  pc.synth_nonhateful = static_cast<int>(config.get_int("synth.nonhateful_communities", 10));
  pc.synth_users = config.get_int("synth.users_per_community", 2000);
  pc.synth_injection_rate = config.get_double("synth.injection_rate", 0.08);

  if (!for_synth_only) pc.validate_inputs_exist();
  return pc;
}

void PipelineConfig::validate_inputs_exist() const {
  auto check = [](const std::string& path, const char* key) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path)) {
      throw ConfigError(std::string("configured path does not exist (") + key + "): " + path);
    }
  };
  check(bot_patterns, "io.bot_patterns");
  check(bot_blocklist, "io.bot_blocklist");
  check(sentiment_lexicon, "io.sentiment_lexicon");
  check(sentiment_boosters, "io.sentiment_boosters");
  check(sentiment_negations, "io.sentiment_negations");
  check(stub_toxicity, "io.stub_toxicity");
  check(stub_attack, "io.stub_attack");
}

}  // namespace firstreply
