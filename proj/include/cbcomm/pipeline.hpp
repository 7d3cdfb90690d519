#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbcomm/corpus.hpp"
#include "cbcomm/econo.hpp"
#include "cbcomm/io.hpp"
#include "cbcomm/topicmodel.hpp"

namespace cbcomm::pipeline {

enum class Stage { ingest, sentences, embed, topics, sentiment, panel, lp, report };

const std::vector<Stage>& all_stages();  // in run order
std::string to_string(Stage s);
Stage parse_stage(const std::string& s);  // ConfigError for unknown names
// Direct upstream stages whose artifacts `s` reads.
std::vector<Stage> upstream(Stage s);

// Per-stage seed: splitmix64(global ^ fnv1a64(stage name)).
std::uint64_t stage_seed(std::uint64_t global_seed, Stage s);

// Default cluster list for the regressions: the aggregate plus eight topic names.
const std::vector<std::string>& default_clusters();

struct PipelineConfig {
  fs::path config_path;
  fs::path corpus_dir;
  fs::path prices;
  fs::path meetings;
  fs::path output_dir;
  std::uint64_t seed = 0;

  // ingest / sentences
  std::optional<DateWindow> study_window;
  std::vector<std::string> allowed_speakers{"Governor", "Deputy Governor"};
  bool keep_questions = false;
  int min_words = corpus::kDefaultMinWords;

  // embed
  std::string embedding_provider;  // empty: environment, then "hash"
  int embedding_dim = 384;
  std::size_t embedding_batch = 64;

  // topics
  topicmodel::TopicModelConfig topics;
  bool scale_min_cluster_size = true;
  std::size_t reference_corpus_size = 10000;
  topicmodel::ReductionMethod doc_map_method = topicmodel::ReductionMethod::umap;

  // sentiment
  std::string sentiment_provider;  // empty: environment, then "lexicon"
  std::optional<fs::path> lexicon;
  std::size_t sentiment_batch = 64;

  // panel / lp
  std::vector<std::string> clusters = default_clusters();
  std::vector<econo::LPSpec> specs{econo::LPSpec{}};
  std::vector<econo::GovernorTenure> tenures = econo::default_tenures();
  DateWindow covid_window = econo::default_covid_window();
  int max_meeting_lag_days = 7;  // sentences dated up to this long after a meeting belong to it

  // Provider specs after the environment fallback.
  std::string resolved_embedding_provider() const;
  std::string resolved_sentiment_provider() const;

  // Canonical parameters recorded in the manifest; a change marks the stage stale.
  json stage_params(Stage s) const;
  // External files the stage reads (corpus files, prices, meetings, lexicon).
  std::vector<fs::path> external_inputs(Stage s) const;
};

// Relative paths resolve against the config file's directory. Unknown keys,
// bad values and missing input paths are ConfigErrors.
PipelineConfig parse_config(const json& j, const fs::path& base_dir);
PipelineConfig load_config(const fs::path& path);

struct RunOptions {
  bool force = false;  // run even when upstream artifacts are stale
  std::function<void(const std::string&)> log;
};

struct StageResult {
  Stage stage;
  std::vector<std::string> outputs;  // relative to output_dir
  std::vector<std::string> warnings;
};

// Runs one stage under the output-directory lock. DependencyError when an
// upstream stage has not run; StaleArtifactError when its artifacts, inputs
// or parameters changed since (unless force).
StageResult run_stage(Stage s, const PipelineConfig& cfg, const RunOptions& opts = {});
std::vector<StageResult> run_all(const PipelineConfig& cfg, const RunOptions& opts = {});

// Manifest consistency of an output directory: missing or modified
// artifacts, files the manifest does not list, stages whose inputs changed.
struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};
ValidationReport validate_outputs(const fs::path& output_dir);

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kLockName = ".cbcomm.lock";

// Exclusive lock on an output directory; a lock left by a dead process is
// taken over.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& output_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

// File-name slug of a cluster label: lower case, runs of other characters
// become '_'.
std::string slug(const std::string& s);

}  // namespace cbcomm::pipeline
