#pragma once

// Shared machinery for the pipeline stage implementations.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "firstreply/config.hpp"
#include "firstreply/events.hpp"
#include "firstreply/pipeline.hpp"
#include "firstreply/post.hpp"

namespace firstreply::detail {

namespace fs = std::filesystem;

fs::path stage_dir(const PipelineConfig& config, Stage stage);

// Collects input/output hashes for a stage manifest. Paths inside the
// manifest are relative to the output directory (or verbatim for external
// inputs), so identical runs produce identical manifests.
class ManifestBuilder {
 public:
  ManifestBuilder(const PipelineConfig& config, Stage stage);
  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void set_counter(const std::string& key, const nlohmann::json& value);
  void write();

 private:
  std::string relativize(const std::string& path) const;
  const PipelineConfig& config_;
  Stage stage_;
  nlohmann::json inputs_;
  nlohmann::json outputs_;
  nlohmann::json counters_;
};

// Missing artifact -> MissingArtifactError with the artifact name.
void require_artifact(const std::string& path, const std::string& label);

// Verifies the predecessor ran and under the same configuration.
void check_predecessor(const PipelineConfig& config, Stage predecessor);

// Config hash over semantic keys ('threads' excluded: worker count must not
// change any artifact).
std::string config_hash(const PipelineConfig& config);

struct LoadedEvents {
  std::vector<FirstPostEvent> events;
  std::map<std::string, bool> community_hateful;  // analysis communities
};

// events.csv round-trip used by cohort (write) and stats/simulate (read)
std::string event_csv_header();
std::string event_to_csv(const FirstPostEvent& ev, const std::string& role);
LoadedEvents load_events_csv(const std::string& path);

std::map<std::string, Seconds> load_ban_dates(const std::string& path);
std::vector<std::string> load_name_list(const std::string& path);

// Posts grouped by community (names sorted).
std::map<std::string, std::vector<Post>> group_by_community(std::vector<Post> posts);

void run_synth(const PipelineConfig& config);
void run_ingest(const PipelineConfig& config);
void run_detect(const PipelineConfig& config);
void run_score(const PipelineConfig& config);
void run_cohort(const PipelineConfig& config);
void run_stats(const PipelineConfig& config);
void run_simulate(const PipelineConfig& config);
void run_report(const PipelineConfig& config);

}  // namespace firstreply::detail
