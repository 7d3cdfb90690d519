// cbcomm: run the central-bank communication pipeline stage by stage.
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/pipeline.hpp"

namespace pl = cbcomm::pipeline;

namespace {

// Exit codes: 1 runtime failure, 2 configuration, 3 missing or stale upstream.
int exit_code(const cbcomm::Error& e) {
  if (dynamic_cast<const cbcomm::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const cbcomm::DependencyError*>(&e) || dynamic_cast<const cbcomm::StaleArtifactError*>(&e))
    return 3;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic, sentiment and local-projection pipeline for central bank communication"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool force = false, quiet = false;
  std::string output_dir;

  std::vector<std::pair<CLI::App*, std::optional<pl::Stage>>> runners;
  auto add_runner = [&](const std::string& name, const std::string& help, std::optional<pl::Stage> stage) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config's global seed");
    sub->add_option("-o,--output-dir", output_dir, "override the config's output directory");
    sub->add_flag("--force", force, "run even if upstream artifacts are stale");
    sub->add_flag("-q,--quiet", quiet, "only print warnings and errors");
    runners.emplace_back(sub, stage);
  };
  for (auto s : pl::all_stages()) add_runner(pl::to_string(s), "run the " + pl::to_string(s) + " stage", s);
  add_runner("run-all", "run every stage in order", std::nullopt);

  auto* validate = app.add_subcommand("validate", "check an output directory against its manifest");
  auto* vg = validate->add_option_group("target")->require_option(1);
  vg->add_option("-c,--config", config_path, "pipeline config (JSON)")->check(CLI::ExistingFile);
  vg->add_option("-o,--output-dir", output_dir, "output directory")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const cbcomm::fs::path dir = output_dir.empty() ? pl::load_config(config_path).output_dir : cbcomm::fs::path(output_dir);
      const auto report = pl::validate_outputs(dir);
      for (const auto& p : report.problems) std::cout << "problem: " << p << "\n";
      std::cout << (report.ok() ? "manifest OK\n" : fmt::format("{} problem(s)\n", report.problems.size()));
      return report.ok() ? 0 : 1;
    }
    auto cfg = pl::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!output_dir.empty()) cfg.output_dir = cbcomm::fs::absolute(output_dir);
    pl::RunOptions opts;
    opts.force = force;
    opts.log = [quiet](const std::string& m) {
      if (!quiet || m.rfind("warning:", 0) == 0) std::cerr << m << "\n";
    };
    for (const auto& [sub, stage] : runners) {
      if (!sub->parsed()) continue;
      if (stage)
        pl::run_stage(*stage, cfg, opts);
      else
        pl::run_all(cfg, opts);
    }
    return 0;
  } catch (const cbcomm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
