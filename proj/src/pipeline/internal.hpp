#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cbcomm/pipeline.hpp"
#include "cbcomm/plot.hpp"

namespace cbcomm::pipeline::detail {

// What a stage sees: the config, its seed and a writer that records outputs.
struct StageContext {
  const PipelineConfig& cfg;
  std::uint64_t seed = 0;
  // Upstream stages missing from the manifest (only the report stage tolerates these).
  std::vector<Stage> missing_upstream;
  std::function<void(const std::string&)> log;

  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  fs::path path(const std::string& rel) const { return cfg.output_dir / rel; }
  void write(const std::string& rel, std::string_view contents);
  void write_csv(const std::string& rel, const CsvTable& table) { write(rel, to_csv(table)); }
  void write_json(const std::string& rel, const json& j) { write(rel, j.dump(1) + "\n"); }
  void write_png(const std::string& rel, const plot::Canvas& canvas);
  void warn(std::string message);
  void info(const std::string& message) const {
    if (log) log(message);
  }
};

void run_ingest(StageContext& ctx);
void run_sentences(StageContext& ctx);
void run_embed(StageContext& ctx);
void run_topics(StageContext& ctx);
void run_sentiment(StageContext& ctx);
void run_panel(StageContext& ctx);
void run_lp(StageContext& ctx);
void run_report(StageContext& ctx);

// Small CSV helpers shared by the stages.
std::string cell(double v);
double number(const std::string& s, const std::string& where);
const std::string& field(const CsvTable& t, const std::vector<std::string>& row, const char* column,
                         const std::string& file);

}  // namespace cbcomm::pipeline::detail
