#include <algorithm>
#include <cstdlib>
#include <set>

#include <fmt/format.h>

#include "cbcomm/embedding.hpp"
#include "cbcomm/error.hpp"
#include "cbcomm/pipeline.hpp"
#include "cbcomm/sentiment.hpp"

namespace cbcomm::pipeline {

namespace {

// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
}

template <typename T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{} has the wrong type", where, key));
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

DateWindow parse_window(const json& j, const std::string& where) {
  check_keys(j, where, {"start", "end"});
  try {
    DateWindow w{parse_date(j.at("start").get<std::string>()), parse_date(j.at("end").get<std::string>())};
    if (w.end < w.start) throw ConfigError(fmt::format("{} ends before it starts", where));
    return w;
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{} needs string 'start' and 'end' dates", where));
  } catch (const ParameterError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

json window_json(const DateWindow& w) { return {{"start", format_date(w.start)}, {"end", format_date(w.end)}}; }

econo::LPSpec parse_spec(const json& j, std::size_t i) {
  const auto where = fmt::format("regression.specs[{}]", i);
  check_keys(j, where,
             {"name", "max_horizon", "regressor", "include_dummies", "include_interactions", "controls", "hac_lag",
              "horizon_unit", "bootstrap"});
  econo::LPSpec s;
  s.name = get<std::string>(j, "name", where, s.name);
  if (s.name.empty() || slug(s.name) != s.name)
    throw ConfigError(fmt::format("{}: name '{}' must be lower-case letters, digits and '_'", where, s.name));
  s.max_horizon = get<int>(j, "max_horizon", where, s.max_horizon);
  s.regressor = econo::parse_regressor_kind(get<std::string>(j, "regressor", where, "balance"));
  s.include_dummies = get<bool>(j, "include_dummies", where, s.include_dummies);
  s.include_interactions = get<bool>(j, "include_interactions", where, s.include_interactions);
  s.controls = get<std::vector<std::string>>(j, "controls", where, {});
  s.hac_lag = get<int>(j, "hac_lag", where, s.hac_lag);
  s.unit = econo::parse_horizon_unit(get<std::string>(j, "horizon_unit", where, "trading"));
  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    const auto bw = where + ".bootstrap";
    check_keys(b, bw, {"replications", "level", "kind"});
    s.bootstrap.replications = get<int>(b, "replications", bw, s.bootstrap.replications);
    s.bootstrap.level = get<double>(b, "level", bw, s.bootstrap.level);
    s.bootstrap.kind = econo::parse_bootstrap_kind(get<std::string>(b, "kind", bw, "percentile"));
  }
  s.validate();
  return s;
}

json spec_json(const econo::LPSpec& s) {
  return {{"name", s.name},
          {"max_horizon", s.max_horizon},
          {"regressor", econo::to_string(s.regressor)},
          {"include_dummies", s.include_dummies},
          {"include_interactions", s.include_interactions},
          {"controls", s.controls},
          {"hac_lag", s.hac_lag},
          {"horizon_unit", s.unit == econo::HorizonUnit::trading ? "trading" : "calendar"},
          {"bootstrap",
           {{"replications", s.bootstrap.replications},
            {"level", s.bootstrap.level},
            {"kind", econo::to_string(s.bootstrap.kind)}}}};
}

std::string env_or(const char* var, const std::string& fallback) {
  const char* v = std::getenv(var);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

const std::vector<std::string>& default_clusters() {
  static const std::vector<std::string> c{"aggregate",
                                          "Inflation Dynamics and Price Stability",
                                          "Trade Balance and External Sector",
                                          "Economic Growth and Demand Dynamics",
                                          "Foreign Exchange Reserves Management",
                                          "Foreign Investment in Securities Markets",
                                          "Interest Rate Policy Framework",
                                          "Financial Markets and Volatility",
                                          "Banking Sector Credit Dynamics"};
  return c;
}

std::string slug(const std::string& s) {
  std::string out;
  bool gap = false;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      if (gap && !out.empty()) out += '_';
      out += static_cast<char>(std::tolower(c));
      gap = false;
    } else {
      gap = true;
    }
  }
  return out;
}

std::string PipelineConfig::resolved_embedding_provider() const {
  return embedding_provider.empty() ? env_or(embedding::kProviderEnvVar, "hash") : embedding_provider;
}

std::string PipelineConfig::resolved_sentiment_provider() const {
  return sentiment_provider.empty() ? env_or(sentiment::kProviderEnvVar, "lexicon") : sentiment_provider;
}

json PipelineConfig::stage_params(Stage s) const {
  switch (s) {
    case Stage::ingest:
      return {{"study_window", study_window ? window_json(*study_window) : json(nullptr)},
              {"allowed_speakers", allowed_speakers},
              {"keep_questions", keep_questions}};
    case Stage::sentences: return {{"min_words", min_words}};
    case Stage::embed:
      return {{"provider", resolved_embedding_provider()}, {"dim", embedding_dim}, {"batch_size", embedding_batch}};
    case Stage::topics: {
      const auto& t = topics;
      json names = json::object();
      for (const auto& [k, v] : t.name_overrides) names[k] = v;
      return {{"reduction", t.reduction == topicmodel::ReductionMethod::umap ? "umap" : "svd"},
              {"n_neighbors", t.reduction_params.n_neighbors},
              {"n_components", t.reduction_params.n_components},
              {"min_dist", t.reduction_params.min_dist},
              {"metric", t.reduction_params.metric == topicmodel::Metric::cosine ? "cosine" : "euclidean"},
              {"clustering", t.clustering == topicmodel::ClusterMethod::hdbscan ? "hdbscan" : "leader"},
              {"min_cluster_size", t.cluster_params.min_cluster_size},
              {"min_samples", t.cluster_params.min_samples},
              {"leader_radius", t.cluster_params.leader_radius},
              {"scale_min_cluster_size", scale_min_cluster_size},
              {"reference_corpus_size", reference_corpus_size},
              {"target_topics", t.target_topics},
              {"n_terms", t.representation.n_terms},
              {"mmr_lambda", t.representation.mmr_lambda},
              {"stop_words", t.vocabulary.stop_words},
              {"names", names},
              {"doc_map", doc_map_method == topicmodel::ReductionMethod::umap ? "umap" : "svd"}};
    }
    case Stage::sentiment:
      return {{"provider", resolved_sentiment_provider()},
              {"lexicon", lexicon ? lexicon->string() : ""},
              {"batch_size", sentiment_batch}};
    case Stage::panel: {
      json ten = json::array();
      for (const auto& t : tenures) ten.push_back({{"governor", econo::to_string(t.governor)}, {"window", window_json(t.window)}});
      return {{"clusters", clusters},
              {"tenures", ten},
              {"covid_window", window_json(covid_window)},
              {"max_meeting_lag_days", max_meeting_lag_days}};
    }
    case Stage::lp: {
      json sp = json::array();
      for (const auto& s : specs) sp.push_back(spec_json(s));
      return {{"specs", sp}};
    }
    case Stage::report: return json::object();
  }
  return json::object();
}

std::vector<fs::path> PipelineConfig::external_inputs(Stage s) const {
  std::vector<fs::path> out;
  switch (s) {
    case Stage::ingest:
      for (const auto& e : fs::directory_iterator(corpus_dir))
        if (e.is_regular_file()) out.push_back(e.path());
      std::sort(out.begin(), out.end());
      break;
    case Stage::sentiment:
      if (lexicon) out.push_back(*lexicon);
      break;
    case Stage::panel: out = {meetings, prices}; break;
    case Stage::lp: out = {prices}; break;
    default: break;
  }
  return out;
}

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  check_keys(j, "config",
             {"corpus_dir", "prices", "meetings", "output_dir", "seed", "study_window", "ingest", "sentences",
              "embedding", "topics", "sentiment", "regression"});
  PipelineConfig c;
  for (const char* key : {"corpus_dir", "prices", "meetings", "output_dir"})
    if (!j.contains(key)) throw ConfigError(fmt::format("config needs '{}'", key));
  c.corpus_dir = resolve(base_dir, get<std::string>(j, "corpus_dir", "config", ""));
  c.prices = resolve(base_dir, get<std::string>(j, "prices", "config", ""));
  c.meetings = resolve(base_dir, get<std::string>(j, "meetings", "config", ""));
  c.output_dir = resolve(base_dir, get<std::string>(j, "output_dir", "config", ""));
  c.seed = get<std::uint64_t>(j, "seed", "config", 0);
  if (j.contains("study_window")) c.study_window = parse_window(j.at("study_window"), "study_window");

  if (j.contains("ingest")) {
    const auto& g = j.at("ingest");
    check_keys(g, "ingest", {"allowed_speakers", "keep_questions"});
    c.allowed_speakers = get<std::vector<std::string>>(g, "allowed_speakers", "ingest", c.allowed_speakers);
    c.keep_questions = get<bool>(g, "keep_questions", "ingest", c.keep_questions);
  }
  if (j.contains("sentences")) {
    const auto& g = j.at("sentences");
    check_keys(g, "sentences", {"min_words"});
    c.min_words = get<int>(g, "min_words", "sentences", c.min_words);
    if (c.min_words < 1) throw ConfigError("sentences.min_words must be at least 1");
  }
  if (j.contains("embedding")) {
    const auto& g = j.at("embedding");
    check_keys(g, "embedding", {"provider", "dim", "batch_size"});
    c.embedding_provider = get<std::string>(g, "provider", "embedding", "");
    c.embedding_dim = get<int>(g, "dim", "embedding", c.embedding_dim);
    c.embedding_batch = get<std::size_t>(g, "batch_size", "embedding", c.embedding_batch);
    if (c.embedding_dim < 2 || c.embedding_batch == 0) throw ConfigError("embedding.dim >= 2 and batch_size >= 1 required");
  }
  if (j.contains("topics")) {
    const auto& g = j.at("topics");
    const std::string w = "topics";
    check_keys(g, w,
               {"reduction", "n_neighbors", "n_components", "min_dist", "metric", "clustering", "min_cluster_size",
                "min_samples", "leader_radius", "scale_min_cluster_size", "reference_corpus_size", "target_topics",
                "n_terms", "mmr_lambda", "stop_words", "names", "doc_map"});
    auto& t = c.topics;
    t.reduction = topicmodel::parse_reduction_method(get<std::string>(g, "reduction", w, "umap"));
    t.reduction_params.n_neighbors = get<int>(g, "n_neighbors", w, t.reduction_params.n_neighbors);
    t.reduction_params.n_components = get<int>(g, "n_components", w, t.reduction_params.n_components);
    t.reduction_params.min_dist = get<double>(g, "min_dist", w, t.reduction_params.min_dist);
    const auto metric = get<std::string>(g, "metric", w, "cosine");
    if (metric != "cosine" && metric != "euclidean") throw ConfigError("topics.metric must be cosine or euclidean");
    t.reduction_params.metric = metric == "cosine" ? topicmodel::Metric::cosine : topicmodel::Metric::euclidean;
    t.clustering = topicmodel::parse_cluster_method(get<std::string>(g, "clustering", w, "hdbscan"));
    t.cluster_params.min_cluster_size = get<int>(g, "min_cluster_size", w, t.cluster_params.min_cluster_size);
    t.cluster_params.min_samples = get<int>(g, "min_samples", w, t.cluster_params.min_samples);
    t.cluster_params.leader_radius = get<double>(g, "leader_radius", w, t.cluster_params.leader_radius);
    c.scale_min_cluster_size = get<bool>(g, "scale_min_cluster_size", w, c.scale_min_cluster_size);
    c.reference_corpus_size = get<std::size_t>(g, "reference_corpus_size", w, c.reference_corpus_size);
    t.target_topics = get<int>(g, "target_topics", w, t.target_topics);
    t.representation.n_terms = get<std::size_t>(g, "n_terms", w, t.representation.n_terms);
    t.representation.mmr_lambda = get<double>(g, "mmr_lambda", w, t.representation.mmr_lambda);
    const auto stop = get<std::vector<std::string>>(g, "stop_words", w, {});
    t.vocabulary.stop_words = {stop.begin(), stop.end()};
    t.name_overrides = get<std::map<std::string, std::string>>(g, "names", w, {});
    c.doc_map_method = topicmodel::parse_reduction_method(get<std::string>(g, "doc_map", w, "umap"));
    if (t.cluster_params.min_cluster_size < 2) throw ConfigError("topics.min_cluster_size must be at least 2");
    if (t.target_topics < 0) throw ConfigError("topics.target_topics must be >= 0");
    if (!(t.representation.mmr_lambda >= 0 && t.representation.mmr_lambda <= 1))
      throw ConfigError("topics.mmr_lambda must lie in [0, 1]");
    if (c.reference_corpus_size == 0) throw ConfigError("topics.reference_corpus_size must be positive");
  }
  if (j.contains("sentiment")) {
    const auto& g = j.at("sentiment");
    check_keys(g, "sentiment", {"provider", "lexicon", "batch_size"});
    c.sentiment_provider = get<std::string>(g, "provider", "sentiment", "");
    if (g.contains("lexicon")) c.lexicon = resolve(base_dir, get<std::string>(g, "lexicon", "sentiment", ""));
    c.sentiment_batch = get<std::size_t>(g, "batch_size", "sentiment", c.sentiment_batch);
    if (c.sentiment_batch == 0) throw ConfigError("sentiment.batch_size must be positive");
  }
  if (j.contains("regression")) {
    const auto& g = j.at("regression");
    check_keys(g, "regression", {"clusters", "specs", "tenures", "covid_window", "max_meeting_lag_days"});
    c.clusters = get<std::vector<std::string>>(g, "clusters", "regression", c.clusters);
    if (c.clusters.empty()) throw ConfigError("regression.clusters is empty");
    if (g.contains("specs")) {
      const auto& specs = g.at("specs");
      if (!specs.is_array() || specs.empty()) throw ConfigError("regression.specs must be a non-empty array");
      c.specs.clear();
      std::set<std::string> names;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        c.specs.push_back(parse_spec(specs[i], i));
        if (!names.insert(c.specs.back().name).second)
          throw ConfigError(fmt::format("regression spec name '{}' used twice", c.specs.back().name));
      }
    }
    if (g.contains("tenures")) {
      c.tenures.clear();
      for (const auto& t : g.at("tenures")) {
        check_keys(t, "regression.tenures[]", {"governor", "start", "end"});
        try {
          c.tenures.push_back({econo::parse_governor(t.at("governor").get<std::string>()),
                               parse_window({{"start", t.at("start")}, {"end", t.at("end")}}, "tenure")});
        } catch (const ParameterError& e) {
          throw ConfigError(e.what());
        } catch (const json::exception&) {
          throw ConfigError("regression.tenures entries need governor, start and end");
        }
      }
    }
    if (g.contains("covid_window")) c.covid_window = parse_window(g.at("covid_window"), "regression.covid_window");
    c.max_meeting_lag_days = get<int>(g, "max_meeting_lag_days", "regression", c.max_meeting_lag_days);
    if (c.max_meeting_lag_days < 0) throw ConfigError("regression.max_meeting_lag_days must be >= 0");
  }

  if (!fs::is_directory(c.corpus_dir))
    throw ConfigError(fmt::format("corpus_dir '{}' is not a directory", c.corpus_dir.string()));
  for (const auto* p : {&c.prices, &c.meetings})
    if (!fs::is_regular_file(*p)) throw ConfigError(fmt::format("input file '{}' not found", p->string()));
  if (c.lexicon && !fs::is_regular_file(*c.lexicon))
    throw ConfigError(fmt::format("lexicon '{}' not found", c.lexicon->string()));
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("config file '{}' not found", path.string()));
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  auto c = parse_config(j, fs::absolute(path).parent_path());
  c.config_path = fs::absolute(path).lexically_normal();
  return c;
}

}  // namespace cbcomm::pipeline
