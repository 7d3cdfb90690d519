#include <algorithm>
#include <csignal>
#include <fcntl.h>
#include <set>
#include <unistd.h>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "internal.hpp"

namespace cbcomm::pipeline {

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> s{Stage::ingest,    Stage::sentences, Stage::embed, Stage::topics,
                                    Stage::sentiment, Stage::panel,     Stage::lp,    Stage::report};
  return s;
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::sentences: return "sentences";
    case Stage::embed: return "embed";
    case Stage::topics: return "topics";
    case Stage::sentiment: return "sentiment";
    case Stage::panel: return "panel";
    case Stage::lp: return "lp";
    case Stage::report: return "report";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  for (auto st : all_stages())
    if (to_string(st) == s) return st;
  throw ConfigError(fmt::format("unknown stage '{}'", s));
}

std::vector<Stage> upstream(Stage s) {
  switch (s) {
    case Stage::ingest: return {};
    case Stage::sentences: return {Stage::ingest};
    case Stage::embed: return {Stage::sentences};
    case Stage::topics: return {Stage::sentences, Stage::embed};
    case Stage::sentiment: return {Stage::sentences, Stage::topics};
    case Stage::panel: return {Stage::sentences, Stage::topics, Stage::sentiment};
    case Stage::lp: return {Stage::panel};
    case Stage::report: return {Stage::topics, Stage::sentiment, Stage::panel, Stage::lp};
  }
  return {};
}

std::uint64_t stage_seed(std::uint64_t global_seed, Stage s) {
  return splitmix64(global_seed ^ fnv1a64(to_string(s)));
}

// ---------------------------------------------------------------------------

OutputLock::OutputLock(const fs::path& output_dir) : path_(output_dir / kLockName) {
  fs::create_directories(output_dir);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const auto pid = std::to_string(::getpid());
      [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    // Take over a lock whose owner is gone.
    long owner = 0;
    try {
      owner = std::stol(read_file(path_));
    } catch (const std::exception&) {
      owner = 0;
    }
    if (owner > 0 && (::kill(static_cast<pid_t>(owner), 0) == 0 || errno == EPERM))
      throw DependencyError(fmt::format("{} is locked by running process {}", output_dir.string(), owner));
    std::error_code ec;
    fs::remove(path_, ec);
  }
  throw DependencyError(fmt::format("could not lock {}", output_dir.string()));
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

bool stochastic(Stage s) { return s == Stage::embed || s == Stage::topics || s == Stage::lp; }

json params_for(const PipelineConfig& cfg, Stage s) {
  json p = cfg.stage_params(s);
  if (stochastic(s)) p["seed"] = stage_seed(cfg.seed, s);
  return p;
}

json load_manifest(const fs::path& dir) {
  const auto p = dir / kManifestName;
  if (!fs::exists(p)) return {{"stages", json::object()}};
  try {
    auto j = json::parse(read_file(p));
    if (!j.contains("stages") || !j["stages"].is_object()) throw CorruptionError("no 'stages' object");
    return j;
  } catch (const json::exception& e) {
    throw CorruptionError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

void save_manifest(const fs::path& dir, const json& m) { write_file_atomic(dir / kManifestName, m.dump(1) + "\n"); }

std::string current_hash(const fs::path& p) { return fs::is_regular_file(p) ? sha256_file(p) : std::string("missing"); }

// All ancestors of `s`, nearest first, without duplicates.
std::vector<Stage> ancestors(Stage s) {
  std::vector<Stage> out;
  std::vector<Stage> todo = upstream(s);
  while (!todo.empty()) {
    const auto u = todo.front();
    todo.erase(todo.begin());
    if (std::find(out.begin(), out.end(), u) != out.end()) continue;
    out.push_back(u);
    for (auto v : upstream(u)) todo.push_back(v);
  }
  return out;
}

// Reasons why a completed stage no longer matches the directory or config.
std::vector<std::string> staleness(const json& entry, const std::string& name, const fs::path& dir,
                                   const PipelineConfig* cfg, Stage s) {
  std::vector<std::string> why;
  for (const auto& [rel, hash] : entry.at("outputs").items())
    if (current_hash(dir / rel) != hash.get<std::string>())
      why.push_back(fmt::format("artifact {} of stage {} changed or is missing", rel, name));
  for (const auto& [rel, hash] : entry.at("inputs").items())
    if (current_hash(dir / rel) != hash.get<std::string>())
      why.push_back(fmt::format("stage {} consumed a different {} than the one on disk", name, rel));
  for (const auto& [path, hash] : entry.at("external").items())
    if (current_hash(path) != hash.get<std::string>())
      why.push_back(fmt::format("input {} changed since stage {} ran", path, name));
  if (cfg && entry.at("params") != params_for(*cfg, s))
    why.push_back(fmt::format("configuration for stage {} changed since it ran", name));
  return why;
}

void remove_outputs(const json& entry, const fs::path& dir) {
  for (const auto& [rel, _] : entry.at("outputs").items()) {
    std::error_code ec;
    fs::remove(dir / rel, ec);
  }
}

StageResult run_locked(Stage s, const PipelineConfig& cfg, const RunOptions& opts) {
  const auto& dir = cfg.output_dir;
  json manifest = load_manifest(dir);
  auto& stages = manifest["stages"];
  const auto name = to_string(s);

  detail::StageContext ctx{cfg, stage_seed(cfg.seed, s), {}, opts.log, {}, {}};
  for (auto u : ancestors(s)) {
    const auto un = to_string(u);
    if (!stages.contains(un)) {
      if (s == Stage::report) {
        ctx.missing_upstream.push_back(u);
        continue;
      }
      throw DependencyError(fmt::format("stage {} needs stage {} to run first", name, un));
    }
    const auto why = staleness(stages[un], un, dir, &cfg, u);
    if (why.empty()) continue;
    std::string msg = fmt::format("stage {} has stale upstream artifacts:", name);
    for (const auto& w : why) msg += "\n  " + w;
    if (!opts.force) throw StaleArtifactError(msg + "\nrerun the upstream stages or pass --force");
    ctx.warn(msg + " (continuing because of --force)");
  }

  if (stages.contains(name)) {
    remove_outputs(stages[name], dir);
    stages.erase(name);
    save_manifest(dir, manifest);
  }

  try {
    switch (s) {
      case Stage::ingest: detail::run_ingest(ctx); break;
      case Stage::sentences: detail::run_sentences(ctx); break;
      case Stage::embed: detail::run_embed(ctx); break;
      case Stage::topics: detail::run_topics(ctx); break;
      case Stage::sentiment: detail::run_sentiment(ctx); break;
      case Stage::panel: detail::run_panel(ctx); break;
      case Stage::lp: detail::run_lp(ctx); break;
      case Stage::report: detail::run_report(ctx); break;
    }
  } catch (...) {
    for (const auto& rel : ctx.outputs) {
      std::error_code ec;
      fs::remove(dir / rel, ec);
    }
    throw;
  }

  json entry{{"params", params_for(cfg, s)},
             {"inputs", json::object()},
             {"external", json::object()},
             {"outputs", json::object()},
             {"warnings", ctx.warnings}};
  for (auto u : upstream(s)) {
    if (!stages.contains(to_string(u))) continue;
    for (const auto& [rel, _] : stages[to_string(u)]["outputs"].items()) entry["inputs"][rel] = current_hash(dir / rel);
  }
  for (const auto& p : cfg.external_inputs(s)) entry["external"][p.string()] = current_hash(p);
  for (const auto& rel : ctx.outputs) entry["outputs"][rel] = sha256_file(dir / rel);
  stages[name] = entry;
  save_manifest(dir, manifest);
  return {s, ctx.outputs, ctx.warnings};
}

}  // namespace

StageResult run_stage(Stage s, const PipelineConfig& cfg, const RunOptions& opts) {
  OutputLock lock(cfg.output_dir);
  return run_locked(s, cfg, opts);
}

std::vector<StageResult> run_all(const PipelineConfig& cfg, const RunOptions& opts) {
  OutputLock lock(cfg.output_dir);
  std::vector<StageResult> out;
  for (auto s : all_stages()) out.push_back(run_locked(s, cfg, opts));
  return out;
}

ValidationReport validate_outputs(const fs::path& dir) {
  ValidationReport r;
  if (!fs::is_regular_file(dir / kManifestName)) {
    r.problems.push_back(fmt::format("{} has no {}", dir.string(), kManifestName));
    return r;
  }
  json manifest;
  try {
    manifest = load_manifest(dir);
  } catch (const CorruptionError& e) {
    r.problems.push_back(e.what());
    return r;
  }
  const auto& stages = manifest["stages"];
  std::set<std::string> listed;
  for (const auto& [name, entry] : stages.items()) {
    Stage s;
    try {
      s = parse_stage(name);
    } catch (const ConfigError&) {
      r.problems.push_back(fmt::format("manifest lists unknown stage '{}'", name));
      continue;
    }
    for (auto u : upstream(s))
      if (!stages.contains(to_string(u)) && s != Stage::report)
        r.problems.push_back(fmt::format("stage {} is recorded but its upstream stage {} is not", name, to_string(u)));
    for (const auto& [rel, _] : entry.at("outputs").items()) listed.insert(rel);
    for (auto& w : staleness(entry, name, dir, nullptr, s)) r.problems.push_back(std::move(w));
  }
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel == kManifestName || rel == kLockName) continue;
    if (!listed.count(rel)) r.problems.push_back(fmt::format("dangling artifact {} is not in the manifest", rel));
  }
  return r;
}

}  // namespace cbcomm::pipeline
