// Command-line driver for the reply-effects pipeline.
//
// Subcommands run one stage each (synth, ingest, detect, score, cohort,
// stats, simulate, report) or the whole chain (all). Every stage reads its
// predecessors' artifacts from the output directory and records a manifest,
// so artifacts stay traceable to the config and seeds that produced them.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "firstreply/config.hpp"
#include "firstreply/errors.hpp"
#include "firstreply/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

firstreply::Config load_config(const std::string& config_path,
                               const std::vector<std::string>& overrides,
                               const std::string& output_dir, int threads) {
  firstreply::Config config = config_path.empty()
                                  ? firstreply::Config()
                                  : firstreply::Config::from_file(config_path);
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw firstreply::ConfigError("--set expects key=value, got: " + kv);
    }
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!output_dir.empty()) config.set("output_dir", output_dir);
  if (threads > 0) config.set("threads", std::to_string(threads));
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "firstreply: hateful-community detection, matched-cohort construction, "
      "reply-content scoring, engagement modeling and counterfactual growth "
      "simulation over post archives"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("-c,--config", config_path, "TOML-style key/value config file");
  app.add_option("-o,--output-dir", output_dir, "output directory (overrides output_dir key)");
  app.add_option("-s,--set", overrides,
                 "override a config key, e.g. --set cohort.seed=7 (repeatable)");
  app.add_option("-t,--threads", threads, "worker threads (results are thread-count invariant)");

  const char* stage_help[] = {
      "generate a synthetic archive with planted ground truth",
      "parse archives, drop bot accounts, normalize posts",
      "find distinctive words, build the hate lexicon, classify communities",
      "score posts for sentiment, toxicity and attack (stub or remote)",
      "build matched user pairs and matched community pairs",
      "compute ERR tables, paired tests, correlations and engagement models",
      "simulate growth under default and nicer-replies scenarios",
      "assemble the report and the global artifact manifest",
  };
  using firstreply::Stage;
  const Stage stages[] = {Stage::synth,  Stage::ingest,   Stage::detect, Stage::score,
                          Stage::cohort, Stage::stats,    Stage::simulate, Stage::report};
  for (int i = 0; i < 8; ++i) {
    app.add_subcommand(firstreply::to_string(stages[i]), stage_help[i]);
  }
  app.add_subcommand("all", "run ingest through report in order");

  CLI11_PARSE(app, argc, argv);

  try {
    firstreply::Config config = load_config(config_path, overrides, output_dir, threads);
    std::string sub = app.get_subcommands().front()->get_name();
    bool synth_only = sub == "synth";
    firstreply::PipelineConfig pipeline_config =
        firstreply::PipelineConfig::resolve(config, synth_only);
    if (sub == "all") {
      firstreply::run_all(pipeline_config);
    } else {
      firstreply::run_stage(firstreply::stage_from_string(sub), pipeline_config);
    }
    return kExitOk;
  } catch (const firstreply::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const firstreply::ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    return kExitConvergence;
  } catch (const firstreply::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const firstreply::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
