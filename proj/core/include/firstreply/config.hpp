#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace firstreply {

// Flat key/value configuration parsed from a TOML-style file: [section]
// headers prefix keys with "section.", values are quoted strings, numbers or
// booleans, '#' starts a comment. CLI flags override file keys.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  int64_t require_int(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Canonical "key=value" dump (sorted), the basis of the config hash.
  std::string canonical() const;
  std::string hash() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Everything the pipeline stages consume, resolved and validated from Config.
struct PipelineConfig {
  std::string output_dir;
  int threads = 1;

  // inputs
  std::string archive;
  std::string background_archive;
  std::string bot_patterns;
  std::string bot_blocklist;
  std::string sentiment_lexicon;
  std::string sentiment_boosters;
  std::string sentiment_negations;
  std::string stub_toxicity;
  std::string stub_attack;
  std::string annotations;
  std::string replacements;
  std::string ban_dates;
  std::string detect_candidates;
  std::string match_candidates;

  // detect
  double sage_lambda = 1.0;
  int sage_top_k = 100;
  int64_t sage_min_count = 10;

  // score
  std::string scorer = "stub";  // stub | remote
  std::string endpoint;
  std::string credentials_env = "FIRSTREPLY_SCORER_TOKEN";
  double rate_limit = 10.0;
  std::string score_cache;  // default <output_dir>/score/cache.tsv

  // cohort
  uint64_t cohort_seed = 0;
  int64_t pool_cap = 30000;
  int64_t candidate_min_members = 10000;
  int64_t candidate_max_members = 2000000;
  std::optional<int64_t> end_of_data;  // default: max created_at in the data

  // simulate
  uint64_t simulate_seed = 0;
  int replications = 100;

  // synth
  uint64_t synth_seed = 1;
  int synth_hateful = 10;
  int synth_nonhateful = 10;
  int64_t synth_users = 2000;
  double synth_injection_rate = 0.08;

  Config raw;  // retained for hashing and the manifest

  // Resolves keys and applies defaults. With `for_synth_only` the input-file
  // existence checks are skipped (synth generates them).
  static PipelineConfig resolve(const Config& config, bool for_synth_only = false);
  void validate_inputs_exist() const;
};

}  // namespace firstreply
