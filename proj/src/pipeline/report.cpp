#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "internal.hpp"

namespace cbcomm::pipeline::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Figures {
  StageContext& ctx;
  json index = json::array();

  void add(const std::string& name, const std::string& what, const CsvTable& table, const plot::Canvas& canvas) {
    ctx.write_csv("figures/" + name + ".csv", table);
    ctx.write_png("figures/" + name + ".png", canvas);
    index.push_back({{"figure", name}, {"shows", what}, {"status", "written"}});
  }
  void skip(const std::string& name, const std::string& reason) {
    ctx.warn(fmt::format("figure {} skipped: {}", name, reason));
    index.push_back({{"figure", name}, {"status", "skipped"}, {"reason", reason}});
  }
};

std::map<int, std::string> topic_names(const StageContext& ctx) {
  const auto info = read_csv(ctx.path("topic_info.csv"));
  std::map<int, std::string> out;
  for (const auto& r : info.rows)
    out[static_cast<int>(number(field(info, r, "topic", "topic_info.csv"), "topic_info.csv"))] =
        field(info, r, "name", "topic_info.csv");
  return out;
}

// Topic shares per date, wide (heatmap) and long (lines).
void topic_figures(Figures& f) {
  const auto names = topic_names(f.ctx);
  const auto tot = read_csv(f.ctx.path("topics_over_time.csv"));
  std::vector<std::string> dates;
  std::map<std::pair<std::string, int>, double> share;
  for (const auto& r : tot.rows) {
    const auto& d = field(tot, r, "date", "topics_over_time.csv");
    if (dates.empty() || dates.back() != d) dates.push_back(d);
    share[{d, static_cast<int>(number(field(tot, r, "topic", "topics_over_time.csv"), "topics_over_time.csv"))}] =
        number(field(tot, r, "share", "topics_over_time.csv"), "topics_over_time.csv");
  }
  if (dates.empty() || names.empty()) {
    f.skip("topic_heatmap", "no non-outlier topics");
    f.skip("topic_prevalence", "no non-outlier topics");
    return;
  }
  auto value = [&](const std::string& d, int t) {
    const auto it = share.find({d, t});
    return it == share.end() ? 0.0 : it->second;
  };

  CsvTable wide{{"date"}, {}};
  plot::Heatmap hm{"Topic distribution by date", dates, {}, {}, false};
  for (const auto& [t, n] : names) {
    wide.header.push_back(n);
    hm.col_labels.push_back(n);
  }
  for (const auto& d : dates) {
    std::vector<std::string> row{d};
    std::vector<double> vals;
    for (const auto& [t, _] : names) {
      row.push_back(cell(value(d, t)));
      vals.push_back(value(d, t));
    }
    wide.rows.push_back(std::move(row));
    hm.values.push_back(std::move(vals));
  }
  f.add("topic_heatmap", "share of each topic among the date's non-outlier sentences", wide, plot::render(hm));

  CsvTable lng{{"date", "topic", "topic_name", "share"}, {}};
  plot::LineChart lc{"Evolution of topic prevalence", "meeting date", "share", {}, std::nullopt, false, dates};
  for (const auto& [t, n] : names) {
    plot::Series s{n, {}, {}};
    for (std::size_t i = 0; i < dates.size(); ++i) {
      const double v = value(dates[i], t);
      lng.rows.push_back({dates[i], std::to_string(t), n, cell(v)});
      s.x.push_back(double(i));
      s.y.push_back(v);
    }
    lc.series.push_back(std::move(s));
  }
  f.add("topic_prevalence", "topic share per date", lng, plot::render(lc));
}

// 2-D document map coloured by topic.
void doc_map_figure(Figures& f) {
  const auto names = topic_names(f.ctx);
  const auto dm = read_csv(f.ctx.path("doc_map.csv"));
  CsvTable out{{"sentence_id", "x", "y", "topic", "topic_name"}, {}};
  plot::Scatter sc{"Documents in reduced space", {}, {}, {}, {}};
  for (const auto& [t, n] : names) sc.group_labels.push_back(n);
  for (const auto& r : dm.rows) {
    const int t = static_cast<int>(number(field(dm, r, "topic", "doc_map.csv"), "doc_map.csv"));
    const auto it = names.find(t);
    out.rows.push_back({r[0], field(dm, r, "x", "doc_map.csv"), field(dm, r, "y", "doc_map.csv"), std::to_string(t),
                        it == names.end() ? "outlier" : it->second});
    sc.x.push_back(number(field(dm, r, "x", "doc_map.csv"), "doc_map.csv"));
    sc.y.push_back(number(field(dm, r, "y", "doc_map.csv"), "doc_map.csv"));
    sc.group.push_back(t);
  }
  f.add("doc_map", "2-D coordinates of every sentence with its topic", out, plot::render(sc));
}

// Balance per date and topic, passed through unchanged.
void sentiment_figure(Figures& f) {
  const auto names = topic_names(f.ctx);
  const auto sd = read_csv(f.ctx.path("sentiment_by_date_topic.csv"));
  const std::string file = "sentiment_by_date_topic.csv";
  CsvTable out{{"date", "topic", "topic_name", "balance", "balance_defined"}, {}};
  std::vector<std::string> dates, topics;
  std::map<std::pair<std::string, std::string>, double> val;
  for (const auto& r : sd.rows) {
    const auto& d = field(sd, r, "date", file);
    const auto& t = field(sd, r, "topic", file);
    std::string name = "all topics";
    if (t != "all") {
      const auto it = names.find(static_cast<int>(number(t, file)));
      name = it == names.end() ? t : it->second;
    }
    out.rows.push_back({d, t, name, field(sd, r, "balance", file), field(sd, r, "balance_defined", file)});
    if (dates.empty() || dates.back() != d) dates.push_back(d);
    if (std::find(topics.begin(), topics.end(), t) == topics.end()) topics.push_back(t);
    val[{d, t}] = field(sd, r, "balance_defined", file) == "1" ? number(field(sd, r, "balance", file), file) : kNaN;
  }
  if (dates.empty()) {
    f.skip("sentiment_heatmap", "no sentiment rows");
    return;
  }
  std::sort(topics.begin(), topics.end(), [&](const std::string& a, const std::string& b) {
    if (a == "all" || b == "all") return a == "all" && b != "all";
    return number(a, file) < number(b, file);
  });
  plot::Heatmap hm{"Sentiment balance across topics and time", dates, {}, {}, true};
  for (const auto& t : topics) {
    const auto it = t == "all" ? names.end() : names.find(static_cast<int>(number(t, file)));
    hm.col_labels.push_back(t == "all" ? "all topics" : it == names.end() ? t : it->second);
  }
  for (const auto& d : dates) {
    std::vector<double> row;
    for (const auto& t : topics) {
      const auto it = val.find({d, t});
      row.push_back(it == val.end() ? kNaN : it->second);
    }
    hm.values.push_back(std::move(row));
  }
  f.add("sentiment_heatmap", "sentiment balance per date and topic (grey: undefined)", out, plot::render(hm));
}

// One impulse response panel per cluster and spec.
void irf_figures(Figures& f) {
  const auto cl = read_csv(f.ctx.path("clusters.csv"));
  for (const auto& crow : cl.rows) {
    const auto& s = field(cl, crow, "slug", "clusters.csv");
    const auto& label = field(cl, crow, "cluster", "clusters.csv");
    for (const auto& spec : f.ctx.cfg.specs) {
      const auto name = fmt::format("irf_{}_{}", s, spec.name);
      const auto path = f.ctx.path(name + ".csv");
      if (!fs::exists(path)) {
        f.skip(name, "no estimates for this cluster and spec");
        continue;
      }
      const auto irf = read_csv(path);
      CsvTable out{{"horizon", "beta", "ci_low", "ci_high"}, {}};
      plot::Series line{"beta", {}, {}};
      plot::Band band;
      for (const auto& r : irf.rows) {
        const auto& h = field(irf, r, "horizon", name);
        out.rows.push_back({h, field(irf, r, "beta", name), field(irf, r, "ci_low", name), field(irf, r, "ci_high", name)});
        const double x = number(h, name);
        line.x.push_back(x);
        line.y.push_back(number(field(irf, r, "beta", name), name));
        band.x.push_back(x);
        band.low.push_back(number(field(irf, r, "ci_low", name), name));
        band.high.push_back(number(field(irf, r, "ci_high", name), name));
      }
      plot::LineChart lc{fmt::format("Response to {} sentiment ({})", label, spec.name),
                         spec.unit == econo::HorizonUnit::trading ? "horizon (trading days)" : "horizon (days)",
                         "log return", {line}, band, true, {}};
      const bool has_band = std::any_of(band.low.begin(), band.low.end(), [](double v) { return std::isfinite(v); });
      if (!has_band) lc.band.reset();
      f.add(name, fmt::format("{}% {} bootstrap band around the sentiment coefficient", spec.bootstrap.level,
                              econo::to_string(spec.bootstrap.kind)),
            out, plot::render(lc));
    }
  }
}

}  // namespace

void run_report(StageContext& ctx) {
  Figures f{ctx};
  auto missing = [&](Stage s) {
    return std::find(ctx.missing_upstream.begin(), ctx.missing_upstream.end(), s) != ctx.missing_upstream.end();
  };
  if (missing(Stage::topics)) {
    for (const char* n : {"topic_heatmap", "topic_prevalence", "doc_map", "sentiment_heatmap"})
      f.skip(n, "topics stage has not run");
  } else {
    topic_figures(f);
    doc_map_figure(f);
    if (missing(Stage::sentiment))
      f.skip("sentiment_heatmap", "sentiment stage has not run");
    else
      sentiment_figure(f);
  }
  if (missing(Stage::lp))
    f.skip("irf", "lp stage has not run");
  else
    irf_figures(f);
  ctx.write_json("figures/index.json", f.index);
}

}  // namespace cbcomm::pipeline::detail
