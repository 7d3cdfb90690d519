#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "cbcomm/embedding.hpp"
#include "cbcomm/error.hpp"
#include "cbcomm/sentiment.hpp"
#include "cbcomm/text.hpp"
#include "internal.hpp"

namespace cbcomm::pipeline::detail {

void StageContext::write(const std::string& rel, std::string_view contents) {
  write_file_atomic(path(rel), contents);
  outputs.push_back(rel);
}

void StageContext::write_png(const std::string& rel, const plot::Canvas& canvas) {
  canvas.write_png(path(rel));
  outputs.push_back(rel);
}

void StageContext::warn(std::string message) {
  if (log) log("warning: " + message);
  warnings.push_back(std::move(message));
}

std::string cell(double v) { return format_real(v); }

double number(const std::string& s, const std::string& where) {
  const auto t = text::trim(s);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw CorruptionError(fmt::format("{}: '{}' is not a number", where, s));
  return v;
}

const std::string& field(const CsvTable& t, const std::vector<std::string>& row, const char* column,
                         const std::string& file) {
  const int c = t.column(column);
  if (c < 0) throw CorruptionError(fmt::format("{} has no '{}' column", file, column));
  return row[static_cast<std::size_t>(c)];
}

namespace {

std::vector<corpus::SentenceRecord> load_sentences(const StageContext& ctx) {
  std::vector<corpus::SentenceRecord> out;
  for (const auto& j : read_jsonl(ctx.path("sentences.jsonl"))) out.push_back(corpus::sentence_from_json(j));
  return out;
}

// sentence_id -> topic from topics.jsonl
std::map<std::string, int> load_topic_labels(const StageContext& ctx) {
  std::map<std::string, int> out;
  for (const auto& j : read_jsonl(ctx.path("topics.jsonl")))
    out[j.at("sentence_id").get<std::string>()] = j.at("topic").get<int>();
  return out;
}

std::string topic_key(int topic) { return topic == sentiment::kAllTopics ? "all" : std::to_string(topic); }

}  // namespace

// ---------------------------------------------------------------------------

void run_ingest(StageContext& ctx) {
  corpus::IngestOptions opts;
  opts.study_window = ctx.cfg.study_window;
  opts.allowed_speakers = {ctx.cfg.allowed_speakers.begin(), ctx.cfg.allowed_speakers.end()};
  opts.keep_questions = ctx.cfg.keep_questions;
  const auto loaded = corpus::load_corpus_dir(ctx.cfg.corpus_dir, opts);
  for (const auto& s : loaded.skipped) ctx.warn("skipped document " + s);
  const auto paragraphs = corpus::ingest(loaded.documents, opts);
  if (paragraphs.empty()) throw ParameterError("ingest produced no paragraphs");
  std::vector<json> rows;
  for (const auto& p : paragraphs) rows.push_back(corpus::to_json(p));
  ctx.write("paragraphs.jsonl", to_jsonl(rows));
  ctx.write_json("ingest_report.json", {{"documents", loaded.documents.size()},
                                        {"paragraphs", paragraphs.size()},
                                        {"skipped", loaded.skipped}});
  ctx.info(fmt::format("ingest: {} documents, {} paragraphs", loaded.documents.size(), paragraphs.size()));
}

void run_sentences(StageContext& ctx) {
  const corpus::SentenceSplitter splitter;
  std::vector<corpus::SentenceRecord> all;
  for (const auto& j : read_jsonl(ctx.path("paragraphs.jsonl"))) {
    auto s = splitter.split(corpus::paragraph_from_json(j));
    all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  const auto kept = corpus::filter_sentences(all, ctx.cfg.min_words);
  if (kept.empty()) throw ParameterError(fmt::format("no sentence has at least {} words", ctx.cfg.min_words));
  std::vector<json> rows;
  for (const auto& s : kept) rows.push_back(corpus::to_json(s));
  ctx.write("sentences.jsonl", to_jsonl(rows));
  const auto th = corpus::suggest_threshold(all);
  ctx.write_json("corpus_stats.json",
                 {{"before_filter", corpus::to_json(corpus::corpus_stats(all))},
                  {"after_filter", corpus::to_json(corpus::corpus_stats(kept))},
                  {"min_words", ctx.cfg.min_words},
                  {"threshold_suggestion",
                   {{"suggested", th.suggested},
                    {"mean", th.mean},
                    {"median", th.median},
                    {"mode", th.mode},
                    {"samples_near_threshold", th.samples_near_threshold}}}});
  ctx.info(fmt::format("sentences: {} kept of {}", kept.size(), all.size()));
}

void run_embed(StageContext& ctx) {
  const auto sentences = load_sentences(ctx);
  auto provider = embedding::make_provider(ctx.cfg.resolved_embedding_provider(), ctx.cfg.embedding_dim, ctx.seed);
  embedding::EmbedOptions opts;
  opts.batch_size = ctx.cfg.embedding_batch;
  const auto m = embedding::embed_batch(sentences, *provider, opts);
  embedding::save_embeddings(m, ctx.path("embeddings.bin"));
  ctx.outputs.push_back("embeddings.bin");
  ctx.outputs.push_back(embedding::sidecar_path(fs::path("embeddings.bin")).string());
  ctx.info(fmt::format("embed: {} x {} via {}", m.n_rows, m.dim, m.provider_id));
}

void run_topics(StageContext& ctx) {
  const auto sentences = load_sentences(ctx);
  const auto emb = embedding::load_embeddings(ctx.path("embeddings.bin"));
  if (emb.n_rows != sentences.size())
    throw StaleArtifactError("embeddings.bin does not match sentences.jsonl; rerun embed");
  std::vector<std::string> docs;
  std::vector<Date> dates;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (emb.sentence_ids[i] != sentences[i].sentence_id)
      throw StaleArtifactError("embeddings.bin rows are not aligned with sentences.jsonl; rerun embed");
    docs.push_back(sentences[i].text);
    dates.push_back(sentences[i].date);
  }

  auto tc = ctx.cfg.topics;
  tc.reduction_params.seed = ctx.seed;
  const int mcs = ctx.cfg.scale_min_cluster_size
                      ? topicmodel::scaled_min_cluster_size(tc.cluster_params.min_cluster_size, sentences.size(),
                                                            ctx.cfg.reference_corpus_size)
                      : tc.cluster_params.min_cluster_size;
  tc.cluster_params.min_cluster_size = mcs;
  const auto model = topicmodel::fit_topic_model(emb, docs, tc);
  for (const auto& w : model.warnings) ctx.warn(w);
  if (model.n_topics == 0) ctx.warn("every sentence is an outlier; downstream topic statistics are empty");

  auto name_of = [&](int t) { return t == topicmodel::kOutlier ? std::string("outlier") : model.topic_names[t]; };
  std::vector<json> rows;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    rows.push_back({{"sentence_id", model.sentence_ids[i]}, {"topic", model.labels[i]}, {"topic_name", name_of(model.labels[i])}});
  ctx.write("topics.jsonl", to_jsonl(rows));

  const auto sizes = model.topic_sizes();
  CsvTable info{{"topic", "name", "size", "terms", "short_list"}, {}};
  for (int t = 0; t < model.n_topics; ++t) {
    const auto& tt = model.top_terms[static_cast<std::size_t>(t)];
    std::string terms;
    for (const auto& w : tt.terms) terms += (terms.empty() ? "" : " ") + w;
    info.rows.push_back({std::to_string(t), model.topic_names[t], std::to_string(sizes[t]), terms,
                         tt.short_list ? "1" : "0"});
  }
  ctx.write_csv("topic_info.csv", info);

  CsvTable ct{{"term", "topic", "score"}, {}};
  const auto& c = model.ctfidf;
  for (std::size_t col = 0; col < c.topics.size(); ++col) {
    std::vector<std::size_t> idx;
    for (std::size_t w = 0; w < c.vocabulary.size(); ++w)
      if (c.counts(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(col)) > 0) idx.push_back(w);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return c.scores(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(col)) >
             c.scores(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(col));
    });
    for (auto w : idx)
      ct.rows.push_back({c.vocabulary[w], std::to_string(c.topics[col]),
                         cell(c.scores(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(col)))});
  }
  ctx.write_csv("ctfidf.csv", ct);

  CsvTable tot{{"date", "topic", "topic_name", "count", "share"}, {}};
  for (const auto& r : topicmodel::topics_over_time(model.labels, dates))
    tot.rows.push_back({format_date(r.date), std::to_string(r.topic), name_of(r.topic), std::to_string(r.count),
                        cell(r.share)});
  ctx.write_csv("topics_over_time.csv", tot);

  const auto map = topicmodel::doc_map_2d(emb, splitmix64(ctx.seed ^ fnv1a64("doc_map")), ctx.cfg.doc_map_method,
                                          tc.reduction_params.n_neighbors);
  CsvTable dm{{"sentence_id", "x", "y", "topic"}, {}};
  for (std::size_t i = 0; i < sentences.size(); ++i)
    dm.rows.push_back({model.sentence_ids[i], cell(map(static_cast<Eigen::Index>(i), 0)),
                       cell(map(static_cast<Eigen::Index>(i), 1)), std::to_string(model.labels[i])});
  ctx.write_csv("doc_map.csv", dm);

  const auto outliers = std::count(model.labels.begin(), model.labels.end(), topicmodel::kOutlier);
  ctx.write_json("topics_report.json", {{"sentences", sentences.size()},
                                        {"topics", model.n_topics},
                                        {"outliers", outliers},
                                        {"min_cluster_size", mcs},
                                        {"warnings", model.warnings}});
  ctx.info(fmt::format("topics: {} topics, {} outliers (min_cluster_size {})", model.n_topics, outliers, mcs));
}

void run_sentiment(StageContext& ctx) {
  const auto sentences = load_sentences(ctx);
  const auto topics = load_topic_labels(ctx);
  const auto lex = ctx.cfg.lexicon ? sentiment::load_lexicon(*ctx.cfg.lexicon) : sentiment::default_lexicon();
  auto provider = sentiment::make_provider(ctx.cfg.resolved_sentiment_provider(), lex);
  sentiment::ClassifyOptions opts;
  opts.batch_size = ctx.cfg.sentiment_batch;
  const auto records = sentiment::classify_batch(sentences, *provider, opts);
  std::vector<json> rows;
  for (const auto& r : records) rows.push_back(sentiment::to_json(r));
  ctx.write("sentiment.jsonl", to_jsonl(rows));

  std::map<std::string, Date> dates;
  for (const auto& s : sentences) dates[s.sentence_id] = s.date;
  CsvTable agg{{"date", "topic", "n_dovish", "n_hawkish", "n_neutral", "avg_score", "balance", "balance_defined"}, {}};
  for (const auto& a : sentiment::aggregate(records, topics, dates))
    agg.rows.push_back({format_date(a.date), topic_key(a.topic), std::to_string(a.n_dovish),
                        std::to_string(a.n_hawkish), std::to_string(a.n_neutral), cell(a.avg_score), cell(a.balance),
                        a.balance_defined ? "1" : "0"});
  ctx.write_csv("sentiment_by_date_topic.csv", agg);
  ctx.info(fmt::format("sentiment: {} sentences via {}", records.size(), provider->id()));
}

// ---------------------------------------------------------------------------

namespace {

struct ResolvedCluster {
  std::string label;
  std::string slug;
  int topic;
};

std::vector<ResolvedCluster> resolve_clusters(StageContext& ctx) {
  const auto info = read_csv(ctx.path("topic_info.csv"));
  std::vector<std::pair<int, std::string>> topics;
  for (const auto& r : info.rows)
    topics.emplace_back(static_cast<int>(number(field(info, r, "topic", "topic_info.csv"), "topic_info.csv")),
                        field(info, r, "name", "topic_info.csv"));
  std::vector<ResolvedCluster> out;
  std::set<std::string> seen;
  for (const auto& label : ctx.cfg.clusters) {
    std::optional<int> topic;
    if (slug(label) == "aggregate") {
      topic = sentiment::kAllTopics;
    } else {
      for (const auto& [id, name] : topics)
        if (std::to_string(id) == label || slug(name) == slug(label)) {
          topic = id;
          break;
        }
    }
    if (!topic) {
      ctx.warn(fmt::format("cluster '{}' matches no topic; skipped", label));
      continue;
    }
    const auto s = *topic == sentiment::kAllTopics ? std::string("aggregate")
                   : std::all_of(label.begin(), label.end(), ::isdigit) ? "topic" + label
                                                                          : slug(label);
    if (!seen.insert(s).second) continue;
    out.push_back({label, s, *topic});
  }
  if (out.empty()) throw ConfigError("no configured regression cluster matches a topic");
  return out;
}

}  // namespace

void run_panel(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto prices = econo::load_prices(cfg.prices);
  const auto meetings = econo::load_meetings(cfg.meetings);
  std::set<std::string> control_names;
  for (const auto& m : meetings)
    for (const auto& [k, _] : m.controls) control_names.insert(k);

  std::vector<json> dropped;
  CsvTable ev{{"meeting_date", "aligned_date", "governor", "covid"}, {}};
  for (const auto& c : control_names) ev.header.push_back(c);
  std::vector<Date> meeting_dates;
  for (const auto& m : meetings) {
    econo::MeetingEvent e;
    try {
      e = econo::make_event(m, prices, cfg.tenures, cfg.covid_window);
    } catch (const RangeError& err) {
      dropped.push_back({{"meeting_date", format_date(m.meeting_date)}, {"reason", err.what()}});
      continue;
    }
    std::vector<std::string> row{format_date(e.meeting_date), format_date(e.aligned_date), econo::to_string(e.governor),
                                 std::to_string(e.covid)};
    for (const auto& c : control_names) {
      const auto it = e.controls.find(c);
      row.push_back(it != e.controls.end() && it->second ? cell(*it->second) : "");
    }
    ev.rows.push_back(std::move(row));
    meeting_dates.push_back(e.meeting_date);
  }
  if (meeting_dates.empty()) throw ParameterError("no meeting falls inside the price series");
  ctx.write_csv("events.csv", ev);

  const auto clusters = resolve_clusters(ctx);
  CsvTable cl{{"cluster", "slug", "topic"}, {}};
  for (const auto& c : clusters) cl.rows.push_back({c.label, c.slug, topic_key(c.topic)});
  ctx.write_csv("clusters.csv", cl);

  // Sentences belong to the latest meeting on or before their date, within the lag.
  const auto sentences = load_sentences(ctx);
  const auto topics = load_topic_labels(ctx);
  std::vector<sentiment::SentimentRecord> records;
  std::map<std::string, Date> meeting_of;
  long unassigned = 0;
  std::map<std::string, sentiment::SentimentRecord> by_id;
  for (const auto& j : read_jsonl(ctx.path("sentiment.jsonl"))) {
    auto r = sentiment::record_from_json(j);
    by_id.emplace(r.sentence_id, std::move(r));
  }
  for (const auto& s : sentences) {
    const auto it = std::upper_bound(meeting_dates.begin(), meeting_dates.end(), s.date);
    if (it == meeting_dates.begin() || (to_days(s.date) - to_days(*std::prev(it))).count() > cfg.max_meeting_lag_days) {
      ++unassigned;
      continue;
    }
    const auto rec = by_id.find(s.sentence_id);
    if (rec == by_id.end()) throw StaleArtifactError(fmt::format("sentence {} has no sentiment record", s.sentence_id));
    records.push_back(rec->second);
    meeting_of[s.sentence_id] = *std::prev(it);
  }
  if (unassigned > 0)
    ctx.warn(fmt::format("{} sentences are dated more than {} days after any meeting and were left out", unassigned,
                         cfg.max_meeting_lag_days));

  const auto agg = sentiment::aggregate(records, topics, meeting_of);
  CsvTable ms{{"meeting_date", "cluster", "topic", "n_dovish", "n_hawkish", "n_neutral", "balance", "balance_defined",
               "avg_score"},
              {}};
  for (const auto& c : clusters)
    for (const auto& a : agg)
      if (a.topic == c.topic)
        ms.rows.push_back({format_date(a.date), c.slug, topic_key(a.topic), std::to_string(a.n_dovish),
                           std::to_string(a.n_hawkish), std::to_string(a.n_neutral), cell(a.balance),
                           a.balance_defined ? "1" : "0", cell(a.avg_score)});
  ctx.write_csv("meeting_sentiment.csv", ms);
  ctx.write_json("panel_report.json", {{"meetings", meetings.size()},
                                       {"events", meeting_dates.size()},
                                       {"dropped_meetings", dropped},
                                       {"unassigned_sentences", unassigned},
                                       {"clusters", cl.rows.size()}});
  ctx.info(fmt::format("panel: {} meetings, {} clusters", meeting_dates.size(), clusters.size()));
}

void run_lp(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto prices = econo::load_prices(cfg.prices);

  const auto ev = read_csv(ctx.path("events.csv"));
  std::vector<econo::MeetingEvent> events;
  for (const auto& r : ev.rows) {
    econo::MeetingEvent e;
    e.meeting_date = parse_date(field(ev, r, "meeting_date", "events.csv"));
    e.aligned_date = parse_date(field(ev, r, "aligned_date", "events.csv"));
    e.governor = econo::parse_governor(field(ev, r, "governor", "events.csv"));
    e.covid = static_cast<int>(number(field(ev, r, "covid", "events.csv"), "events.csv"));
    for (std::size_t c = 4; c < ev.header.size(); ++c)
      e.controls[ev.header[c]] = r[c].empty() ? std::nullopt : std::optional<double>(number(r[c], "events.csv"));
    events.push_back(std::move(e));
  }

  const auto cl = read_csv(ctx.path("clusters.csv"));
  const auto ms = read_csv(ctx.path("meeting_sentiment.csv"));
  CsvTable coef{{"cluster", "spec", "horizon", "column", "beta", "hac_se"}, {}};
  json report = json::array();
  std::optional<EstimationError> first_failure;
  int fitted = 0;
  for (const auto& crow : cl.rows) {
    const auto& s = field(cl, crow, "slug", "clusters.csv");
    for (const auto& spec0 : cfg.specs) {
      auto spec = spec0;
      spec.bootstrap.seed = splitmix64(ctx.seed ^ fnv1a64(s + "/" + spec.name));
      std::map<Date, double> regressor;
      for (const auto& r : ms.rows) {
        if (field(ms, r, "cluster", "meeting_sentiment.csv") != s) continue;
        const char* col = spec.regressor == econo::RegressorKind::balance ? "balance" : "avg_score";
        regressor[parse_date(field(ms, r, "meeting_date", "meeting_sentiment.csv"))] =
            number(field(ms, r, col, "meeting_sentiment.csv"), "meeting_sentiment.csv");
      }
      const auto where = fmt::format("cluster {} spec {}", s, spec.name);
      econo::IRFResult res;
      econo::Panel panel;
      try {
        panel = econo::build_panel(events, regressor, prices, spec);
        res = econo::lp_estimate(panel, spec);
      } catch (const EstimationError& e) {
        // One thin cluster should not sink the others; give up only if nothing fits.
        if (!first_failure) first_failure = EstimationError(fmt::format("{}: {}", where, e.what()), e.collinear_columns());
        ctx.warn(fmt::format("{} not estimated: {}", where, e.what()));
        report.push_back({{"cluster", s}, {"spec", spec.name}, {"status", "failed"}, {"error", e.what()},
                          {"collinear_columns", e.collinear_columns()}});
        continue;
      }
      ++fitted;
      for (const auto& w : res.warnings) ctx.warn(fmt::format("{}: {}", where, w));
      CsvTable irf{{"horizon", "beta", "hac_se", "ci_low", "ci_high", "n_obs"}, {}};
      for (const auto& h : res.horizons) {
        irf.rows.push_back({std::to_string(h.h), cell(h.beta(1)), cell(h.se(1)), cell(h.ci_low), cell(h.ci_high),
                            std::to_string(h.n_obs)});
        for (std::size_t k = 0; k < res.columns.size(); ++k)
          coef.rows.push_back({s, spec.name, std::to_string(h.h), res.columns[k],
                               cell(h.beta(static_cast<Eigen::Index>(k))), cell(h.se(static_cast<Eigen::Index>(k)))});
      }
      ctx.write_csv(fmt::format("irf_{}_{}.csv", s, spec.name), irf);
      report.push_back({{"cluster", s},
                        {"spec", spec.name},
                        {"status", "estimated"},
                        {"meetings", panel.x.rows()},
                        {"columns", res.columns},
                        {"dropped", panel.dropped},
                        {"warnings", res.warnings},
                        {"bootstrap_seed", spec.bootstrap.seed},
                        {"bootstrap_kind", econo::to_string(spec.bootstrap.kind)}});
      ctx.info(fmt::format("lp: {} ({} meetings, horizons 0..{})", where, panel.x.rows(), res.horizons.back().h));
    }
  }
  if (fitted == 0 && first_failure) throw *first_failure;
  ctx.write_csv("lp_coefficients.csv", coef);
  ctx.write_json("lp_report.json", report);
}

}  // namespace cbcomm::pipeline::detail
