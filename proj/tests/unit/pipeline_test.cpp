#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unistd.h>

#include <doctest.h>

#include "cbcomm/error.hpp"
#include "cbcomm/pipeline.hpp"

using namespace cbcomm;
using namespace cbcomm::pipeline;

namespace {

const fs::path kMini = fs::path(CBCOMM_TEST_DATA_DIR) / ".." / ".." / "data" / "mini";

// Scratch copy of the mini corpus with a config trimmed for test speed.
struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& tag) {
    root = fs::temp_directory_path() / ("cbcomm_pipeline_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    fs::copy(kMini / "corpus", root / "corpus", fs::copy_options::recursive);
    for (const char* f : {"prices.csv", "meetings.csv"}) fs::copy_file(kMini / f, root / f);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  json config() const {
    auto j = json::parse(read_file(kMini / "config.json"));
    for (auto& s : j["regression"]["specs"]) s["bootstrap"]["replications"] = 100;
    return j;
  }
  PipelineConfig load(const json& j) const {
    write_file_atomic(root / "config.json", j.dump(2));
    return load_config(root / "config.json");
  }
  PipelineConfig load() const { return load(config()); }
  fs::path out() const { return root / "out"; }
};

RunOptions quiet() {
  RunOptions o;
  o.log = [](const std::string&) {};
  return o;
}

void run_through(Stage last, const PipelineConfig& cfg) {
  for (auto s : all_stages()) {
    run_stage(s, cfg, quiet());
    if (s == last) return;
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out{""};
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) out.emplace_back();
    else out.back() += c;
  }
  return out;
}

std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> out;
  for (std::string line; std::getline(in, line);) out.push_back(split(line));
  return out;
}

}  // namespace

TEST_CASE("config parsing rejects bad input") {
  Workspace ws("config");
  const auto ok = ws.load();
  CHECK(ok.corpus_dir == ws.root / "corpus");
  CHECK(ok.output_dir == ws.root / "out");
  CHECK(ok.seed == 7);
  CHECK(ok.specs.size() == 2);

  auto j = ws.config();
  j["colour"] = "blue";
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  j = ws.config();
  j["topics"]["min_clustre_size"] = 3;
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  j = ws.config();
  j["prices"] = "nope.csv";
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  j = ws.config();
  j.erase("corpus_dir");
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  j = ws.config();
  j["regression"]["specs"][0]["bootstrap"]["replications"] = 50;
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  j = ws.config();
  j["regression"]["specs"][1]["name"] = "baseline";
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  j = ws.config();
  j["seed"] = "seven";
  CHECK_THROWS_AS(ws.load(j), ConfigError);

  CHECK_THROWS_AS(load_config(ws.root / "missing.json"), ConfigError);
  write_file_atomic(ws.root / "broken.json", "{\"seed\": ");
  CHECK_THROWS_AS(load_config(ws.root / "broken.json"), ConfigError);
}

TEST_CASE("stage graph and seeds") {
  CHECK(all_stages().size() == 8);
  CHECK(parse_stage("lp") == Stage::lp);
  CHECK_THROWS_AS(parse_stage("fit"), ConfigError);
  for (auto s : all_stages())
    for (auto u : upstream(s))
      CHECK(std::find(all_stages().begin(), all_stages().end(), u) <
            std::find(all_stages().begin(), all_stages().end(), s));
  CHECK(stage_seed(7, Stage::topics) == stage_seed(7, Stage::topics));
  CHECK(stage_seed(7, Stage::topics) != stage_seed(7, Stage::embed));
  CHECK(stage_seed(7, Stage::topics) != stage_seed(8, Stage::topics));
  CHECK(slug("Banking Sector Credit Dynamics") == "banking_sector_credit_dynamics");
  CHECK(slug("  FX / Reserves ") == "fx_reserves");
}

TEST_CASE("stages refuse to run before their upstream") {
  Workspace ws("deps");
  const auto cfg = ws.load();
  CHECK_THROWS_AS(run_stage(Stage::lp, cfg, quiet()), DependencyError);
  CHECK_THROWS_AS(run_stage(Stage::sentences, cfg, quiet()), DependencyError);
  run_stage(Stage::ingest, cfg, quiet());
  CHECK_THROWS_AS(run_stage(Stage::topics, cfg, quiet()), DependencyError);
  CHECK_NOTHROW(run_stage(Stage::sentences, cfg, quiet()));
}

TEST_CASE("full run writes a consistent, reproducible output directory") {
  Workspace ws("full");
  const auto cfg = ws.load();
  const auto results = run_all(cfg, quiet());
  REQUIRE(results.size() == 8);
  const auto out = ws.out();

  const auto manifest = json::parse(read_file(out / kManifestName));
  for (auto s : all_stages()) CHECK(manifest["stages"].contains(to_string(s)));
  CHECK(manifest["stages"]["topics"]["params"].contains("seed"));
  CHECK(validate_outputs(out).ok());
  CHECK(!fs::exists(out / kLockName));

  SUBCASE("topic shares sum to one per date and match the heatmap") {
    const auto tot = rows(out / "topics_over_time.csv");
    std::map<std::string, double> sum;
    for (std::size_t i = 1; i < tot.size(); ++i) sum[tot[i][0]] += std::stod(tot[i][4]);
    REQUIRE(!sum.empty());
    for (const auto& [d, v] : sum) CHECK(std::abs(v - 1.0) < 1e-12);

    const auto info = rows(out / "topic_info.csv");
    const auto hm = rows(out / "figures" / "topic_heatmap.csv");
    CHECK(hm.size() == sum.size() + 1);
    CHECK(hm[0].size() == info.size());  // date column plus one per topic
    CHECK(fs::file_size(out / "figures" / "topic_heatmap.png") > 100);
  }

  SUBCASE("impulse responses cover horizons 0 to 30") {
    const auto irf = rows(out / "irf_aggregate_baseline.csv");
    REQUIRE(irf.size() == 32);
    for (std::size_t i = 1; i < irf.size(); ++i) {
      CHECK(std::stoi(irf[i][0]) == int(i) - 1);
      CHECK(std::isfinite(std::stod(irf[i][1])));
      CHECK(std::stod(irf[i][3]) <= std::stod(irf[i][4]));
    }
    CHECK(rows(out / "figures" / "irf_aggregate_baseline.csv").size() == 32);
  }

  SUBCASE("the sentiment heatmap passes balance through unchanged") {
    const auto src = rows(out / "sentiment_by_date_topic.csv");
    const auto fig = rows(out / "figures" / "sentiment_heatmap.csv");
    REQUIRE(src.size() == fig.size());
    const auto col = [](const std::vector<std::string>& h, const std::string& n) {
      return static_cast<std::size_t>(std::find(h.begin(), h.end(), n) - h.begin());
    };
    const auto sb = col(src[0], "balance"), fb = col(fig[0], "balance");
    const auto sd = col(src[0], "balance_defined"), fd = col(fig[0], "balance_defined");
    for (std::size_t i = 1; i < src.size(); ++i) {
      CHECK(src[i][0] == fig[i][0]);
      CHECK(src[i][sb] == fig[i][fb]);
      CHECK(src[i][sd] == fig[i][fd]);
    }
  }

  SUBCASE("rerunning a stage reproduces its artifacts byte for byte") {
    std::map<std::string, std::string> before;
    for (const auto& [rel, _] : manifest["stages"]["topics"]["outputs"].items()) before[rel] = read_file(out / rel);
    run_stage(Stage::topics, cfg, quiet());
    for (const auto& [rel, bytes] : before) CHECK_MESSAGE(read_file(out / rel) == bytes, rel);
    CHECK(validate_outputs(out).ok());
  }

  SUBCASE("modified artifacts make downstream stages stale") {
    {
      std::ofstream f(out / "sentences.jsonl", std::ios::app);
      f << "\n";
    }
    CHECK(!validate_outputs(out).ok());
    CHECK_THROWS_AS(run_stage(Stage::topics, cfg, quiet()), StaleArtifactError);
    CHECK_THROWS_AS(run_stage(Stage::lp, cfg, quiet()), StaleArtifactError);
    RunOptions force = quiet();
    force.force = true;
    const auto r = run_stage(Stage::panel, cfg, force);
    CHECK(!r.warnings.empty());
    // Rerunning the producer clears the staleness.
    run_stage(Stage::sentences, cfg, quiet());
    CHECK_NOTHROW(run_stage(Stage::embed, cfg, quiet()));
  }

  SUBCASE("a config change marks the stage stale for its dependants") {
    auto j = ws.config();
    j["sentences"]["min_words"] = 5;
    const auto changed = ws.load(j);
    CHECK_THROWS_AS(run_stage(Stage::embed, changed, quiet()), StaleArtifactError);
    CHECK_NOTHROW(run_stage(Stage::sentences, changed, quiet()));
    CHECK_NOTHROW(run_stage(Stage::embed, changed, quiet()));
  }

  SUBCASE("a changed global seed marks stochastic stages stale") {
    auto other = cfg;
    other.seed = 8;
    CHECK_THROWS_AS(run_stage(Stage::topics, other, quiet()), StaleArtifactError);
    CHECK_NOTHROW(run_stage(Stage::sentences, other, quiet()));
  }

  SUBCASE("validate reports dangling and tampered files") {
    write_file_atomic(out / "stray.txt", "x");
    auto rep = validate_outputs(out);
    REQUIRE(rep.problems.size() == 1);
    CHECK(rep.problems[0].find("stray.txt") != std::string::npos);
    fs::remove(out / "stray.txt");
    write_file_atomic(out / "lp_report.json", "[]");
    rep = validate_outputs(out);
    CHECK(!rep.ok());
    CHECK(std::any_of(rep.problems.begin(), rep.problems.end(),
                      [](const std::string& p) { return p.find("lp_report.json") != std::string::npos; }));
  }

  SUBCASE("a stage rerun drops outputs it no longer produces") {
    write_file_atomic(out / "figures" / "index.json", "{}");
    run_stage(Stage::report, cfg, quiet());
    CHECK(validate_outputs(out).ok());
  }
}

TEST_CASE("a second run of everything is byte-identical") {
  Workspace a("det_a"), b("det_b");
  run_all(a.load(), quiet());
  run_all(b.load(), quiet());
  for (const auto& e : fs::recursive_directory_iterator(a.out())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.out());
    if (rel == kManifestName) continue;  // records absolute input paths
    CHECK_MESSAGE(read_file(e.path()) == read_file(b.out() / rel), rel.string());
  }
}

TEST_CASE("report skips figures whose inputs are missing") {
  Workspace ws("report");
  const auto cfg = ws.load();
  run_through(Stage::panel, cfg);
  const auto r = run_stage(Stage::report, cfg, quiet());
  CHECK(!r.warnings.empty());
  const auto index = json::parse(read_file(ws.out() / "figures" / "index.json"));
  bool irf_skipped = false, heatmap_written = false;
  for (const auto& e : index) {
    if (e["figure"] == "irf") irf_skipped = e["status"] == "skipped";
    if (e["figure"] == "topic_heatmap") heatmap_written = e["status"] == "written";
  }
  CHECK(irf_skipped);
  CHECK(heatmap_written);
  CHECK(validate_outputs(ws.out()).ok());
}

TEST_CASE("output directory lock") {
  Workspace ws("lock");
  const auto cfg = ws.load();
  {
    OutputLock held(ws.out());
    CHECK(fs::exists(ws.out() / kLockName));
    CHECK_THROWS_AS(run_stage(Stage::ingest, cfg, quiet()), DependencyError);
  }
  CHECK(!fs::exists(ws.out() / kLockName));
  // A lock left behind by a process that no longer exists is taken over.
  write_file_atomic(ws.out() / kLockName, "999999999");
  CHECK_NOTHROW(run_stage(Stage::ingest, cfg, quiet()));
  CHECK(!fs::exists(ws.out() / kLockName));
}
