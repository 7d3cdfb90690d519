// Acceptance checks: one PASS, FAIL or SKIP line per criterion. Exit status is
// nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <unistd.h>

#include <fmt/format.h>

#include "cbcomm/econo.hpp"
#include "cbcomm/error.hpp"
#include "cbcomm/pipeline.hpp"
#include "cbcomm/sentiment.hpp"
#include "cbcomm/topicmodel.hpp"

using namespace cbcomm;

namespace {

const fs::path kData = CBCOMM_TEST_DATA_DIR;
const fs::path kMini = CBCOMM_MINI_DIR;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

using econo::Matrix;
using econo::Vector;

// ---------------------------------------------------------------------------

Outcome ctfidf_oracle() {
  const auto fixture = json::parse(read_file(kData / "ctfidf_oracle.json"));
  double worst = 0.0;
  std::size_t cases = 0;
  for (const auto& c : fixture["cases"]) {
    std::map<int, std::vector<std::string>> topics;
    std::size_t tokens = 0;
    for (const auto& [k, v] : c["topics"].items()) {
      topics[std::stoi(k)] = v.get<std::vector<std::string>>();
      for (const auto& s : topics[std::stoi(k)]) tokens += topicmodel::tokenize(s, {}).size();
    }
    if (topics.size() > 5 || tokens > 1000) return check(false, fmt::format("case {} exceeds the toy size", cases));
    const auto r = topicmodel::ctfidf(topics);
    if (r.vocabulary != c["vocabulary"].get<std::vector<std::string>>())
      return check(false, fmt::format("case {}: vocabulary differs", cases));
    for (std::size_t w = 0; w < r.vocabulary.size(); ++w)
      for (std::size_t t = 0; t < r.topics.size(); ++t)
        worst = std::max(worst, std::abs(r.scores(Eigen::Index(w), Eigen::Index(t)) - c["scores"][w][t].get<double>()));
    ++cases;
  }
  return check(cases == 20 && worst <= 1e-12, fmt::format("{} corpora, max |diff| {:.3g}", cases, worst));
}

Outcome balance_algebra() {
  using sentiment::balance;
  bool ok = balance(3, 1) == 0.5 && !balance(0, 0).has_value();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<long> n(0, 500);
  long checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const long d = n(rng), h = n(rng);
    [[maybe_unused]] const long neutral = n(rng);  // never enters the balance
    const auto b = balance(d, h), swapped = balance(h, d);
    if (!b) {
      ok = ok && d == 0 && h == 0 && !swapped;
      continue;
    }
    ok = ok && *b >= -1.0 && *b <= 1.0 && swapped && *swapped == -*b;
    ++checked;
  }
  // Same properties through record-level aggregation with labels swapped.
  std::vector<sentiment::SentimentRecord> recs, flipped;
  std::map<std::string, int> topics;
  std::map<std::string, Date> dates;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const auto id = std::to_string(i);
    const double a = u(rng), b = u(rng) * (1 - a);
    recs.push_back(sentiment::make_record(id, {a, b, 1 - a - b}));
    flipped.push_back(sentiment::make_record(id, {b, a, 1 - a - b}));
    topics[id] = i % 3;
    dates[id] = add_days(parse_date("2021-01-01"), i % 7);
  }
  const auto x = sentiment::aggregate(recs, topics, dates), y = sentiment::aggregate(flipped, topics, dates);
  ok = ok && x.size() == y.size();
  for (std::size_t i = 0; ok && i < x.size(); ++i)
    ok = x[i].balance_defined == y[i].balance_defined && x[i].balance == -y[i].balance;
  return check(ok, fmt::format("balance(3,1) = {}, {} random triples, {} aggregates", *balance(3, 1), checked, x.size()));
}

Outcome ols_recovery() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> kdist(2, 8);
  double worst = 0.0;
  for (int d = 0; d < 100; ++d) {
    const int n = 64, k = kdist(rng);
    Matrix x(n, k);
    Vector beta(k);
    for (int j = 0; j < k; ++j) beta(j) = 2.0 * z(rng);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (int j = 1; j < k; ++j) x(i, j) = z(rng);
    }
    const Vector y = x * beta;
    worst = std::max(worst, (econo::ols(y, x).beta - beta).cwiseAbs().maxCoeff());
  }
  return check(worst <= 1e-10, fmt::format("100 designs, n = 64, max |beta - true| {:.3g}", worst));
}

Outcome hac_bruteforce() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  double worst = 0.0, white = 0.0;
  for (int fixture = 0; fixture < 5; ++fixture) {
    const int n = 50 + 10 * fixture, k = 2 + fixture % 3;
    Matrix x(n, k);
    Vector e(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (int j = 1; j < k; ++j) x(i, j) = z(rng);
      e(i) = z(rng) * (1.0 + std::abs(x(i, k - 1)));  // heteroskedastic
    }
    const Matrix bread = (x.transpose() * x).inverse();
    for (int lag = 0; lag <= 5; ++lag) {
      Matrix meat = Matrix::Zero(k, k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int d = std::abs(i - j);
          if (d > lag) continue;
          const double w = 1.0 - double(d) / (lag + 1);
          meat += w * e(i) * e(j) * x.row(i).transpose() * x.row(j);
        }
      const Matrix want = bread * meat * bread;
      worst = std::max(worst, (econo::hac_covariance(x, e, lag) - want).cwiseAbs().maxCoeff());
    }
    Matrix hc = Matrix::Zero(k, k);
    for (int i = 0; i < n; ++i) hc += e(i) * e(i) * x.row(i).transpose() * x.row(i);
    white = std::max(white, (econo::hac_covariance(x, e, 0) - bread * hc * bread).cwiseAbs().maxCoeff());
  }
  return check(worst <= 1e-8 && white <= 1e-10,
               fmt::format("lags 0-5 max |diff| {:.3g}; lag 0 vs White {:.3g}", worst, white));
}

// Two-column panel (intercept, S) with only horizon 0 filled.
econo::Panel gaussian_panel(std::mt19937_64& rng, int n, double beta1) {
  std::normal_distribution<double> z;
  econo::Panel p;
  p.columns = {"intercept", "S"};
  p.x.resize(n, 2);
  p.y.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    p.x(i, 0) = 1.0;
    p.x(i, 1) = z(rng);
    p.y(i, 0) = 0.2 + beta1 * p.x(i, 1) + z(rng);
    p.meeting_dates.push_back(add_days(parse_date("2015-01-01"), 30 * i));
  }
  return p;
}

Outcome bootstrap_coverage() {
  std::mt19937_64 rng(5);
  const double truth = 0.5;
  int covered = 0;
  const int trials = 500;
  econo::LPSpec spec;
  spec.max_horizon = 0;
  spec.bootstrap.replications = 500;
  spec.bootstrap.level = 90.0;
  spec.bootstrap.kind = econo::BootstrapKind::percentile;
  for (int t = 0; t < trials; ++t) {
    const auto panel = gaussian_panel(rng, 64, truth);
    spec.bootstrap.seed = splitmix64(1000 + t);
    const auto h0 = econo::lp_estimate(panel, spec).horizons.at(0);
    covered += h0.ci_low <= truth && truth <= h0.ci_high;
  }
  const double rate = double(covered) / trials;
  return check(rate >= 0.85 && rate <= 0.95, fmt::format("90% percentile CI covered beta_1 in {:.1f}% of {} trials",
                                                         100 * rate, trials));
}

// Weekday random-walk index and meetings every 30 trading days.
struct NullWorld {
  econo::PriceSeries prices;
  std::vector<econo::MeetingEvent> events;
  std::map<Date, double> sentiment;
};

NullWorld null_world(std::mt19937_64& rng, int meetings) {
  std::normal_distribution<double> z;
  std::vector<econo::PriceRow> rows;
  Date d = parse_date("2015-01-05");
  double level = 20000.0;
  while (static_cast<int>(rows.size()) < 30 * meetings + 60) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
      const double open = level * std::exp(0.002 * z(rng));
      level = open * std::exp(0.0003 + 0.01 * z(rng));
      rows.push_back({d, open, level});
    }
    d = add_days(d, 1);
  }
  NullWorld w{econo::PriceSeries(rows), {}, {}};
  for (int i = 0; i < meetings; ++i) {
    econo::MeetingRow m{rows[static_cast<std::size_t>(30 * i + 5)].date, std::nullopt, {}};
    w.events.push_back(econo::make_event(m, w.prices, econo::default_tenures(), econo::default_covid_window()));
    w.sentiment[m.meeting_date] = std::tanh(z(rng));
  }
  return w;
}

Outcome null_irf() {
  std::mt19937_64 rng(6);
  const int sims = 200;
  econo::LPSpec spec;  // dummies on, horizons 0..30, lag max(1, h)
  spec.bootstrap.replications = 500;
  spec.bootstrap.level = 90.0;
  double rejected = 0.0, horizons = 0.0;
  for (int s = 0; s < sims; ++s) {
    const auto w = null_world(rng, 64);
    spec.bootstrap.seed = splitmix64(2000 + s);
    const auto res = econo::lp_estimate(econo::build_panel(w.events, w.sentiment, w.prices, spec), spec);
    for (const auto& h : res.horizons) {
      rejected += h.ci_low > 0.0 || h.ci_high < 0.0;
      horizons += 1.0;
    }
  }
  const double rate = rejected / horizons;
  return check(rate <= 0.18, fmt::format("{:.1f}% of horizons reject zero at 90% over {} simulations", 100 * rate, sims));
}

Outcome horizon_returns() {
  const auto prices = econo::load_prices(kData / "prices40.csv");
  const auto o = json::parse(read_file(kData / "econo_oracle.json"));
  double worst = 0.0;
  int checked = 0;
  std::set<int> hs;
  for (const auto& c : o["returns"]) {
    if (c["trading"].is_null()) continue;
    const double got = econo::horizon_return(prices, parse_date(c["t"].get<std::string>()), c["h"].get<int>());
    worst = std::max(worst, std::abs(got - c["trading"].get<double>()));
    hs.insert(c["h"].get<int>());
    ++checked;
  }
  return check(prices.size() == 40 && hs == std::set<int>{0, 1, 5, 30} && worst <= 1e-12,
               fmt::format("{} values on the 40-day fixture, max |diff| {:.3g}", checked, worst));
}

Outcome end_to_end() {
  const auto base = fs::temp_directory_path() / fmt::format("cbcomm_accept_{}", ::getpid());
  fs::remove_all(base);
  std::vector<fs::path> outs{base / "a", base / "b"};
  for (const auto& o : outs) {
    const auto cmd = fmt::format("\"{}\" run-all -q -c \"{}\" -o \"{}\" --seed 7 2>/dev/null", CBCOMM_CLI,
                                 (kMini / "config.json").string(), o.string());
    if (std::system(cmd.c_str()) != 0) return check(false, "run-all failed: " + cmd);
  }
  std::size_t csvs = 0;
  std::vector<std::string> differ;
  for (const auto& e : fs::recursive_directory_iterator(outs[0])) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const auto rel = fs::relative(e.path(), outs[0]);
    ++csvs;
    if (!fs::exists(outs[1] / rel) || read_file(e.path()) != read_file(outs[1] / rel)) differ.push_back(rel.string());
  }
  const auto info = read_csv(outs[0] / "topic_info.csv");
  const auto jsonl = read_file(outs[0] / "sentences.jsonl");
  const auto sentences = std::count(jsonl.begin(), jsonl.end(), '\n');
  const auto tot = read_csv(outs[0] / "topics_over_time.csv");
  std::map<std::string, double> sum;
  for (const auto& r : tot.rows)
    sum[r[static_cast<std::size_t>(tot.column("date"))]] += std::stod(r[static_cast<std::size_t>(tot.column("share"))]);
  double worst = 0.0;
  for (const auto& [_, v] : sum) worst = std::max(worst, std::abs(v - 1.0));
  fs::remove_all(base);
  return check(differ.empty() && csvs > 0 && info.rows.size() >= 3 && !sum.empty() && worst <= 1e-12,
               fmt::format("{} sentences, {} CSVs compared, {} differ, {} topics, max |share sum - 1| {:.3g}",
                           sentences, csvs, differ.size(), info.rows.size(), worst));
}

Outcome golden_sentences() {
  const char* spec = std::getenv(sentiment::kGoldenProviderEnvVar);
  if (!spec || !*spec) return {Status::skip, fmt::format("{} not set", sentiment::kGoldenProviderEnvVar)};
  const auto fixture = json::parse(read_file(kData / "golden_sentences.json"));
  const double tol = fixture["tolerance"].get<double>();
  auto provider = sentiment::make_provider(spec, sentiment::default_lexicon());
  std::vector<std::string> bad;
  for (const auto& g : fixture["sentences"]) {
    const auto rec = sentiment::make_record("g", sentiment::classify(g["text"].get<std::string>(), *provider));
    const double want = g["score"].get<double>();
    if (sentiment::to_string(rec.label) != g["label"].get<std::string>() || std::abs(rec.signed_score - want) > tol)
      bad.push_back(fmt::format("{} {:+.2f} (want {} {:+.2f})", sentiment::to_string(rec.label), rec.signed_score,
                                g["label"].get<std::string>(), want));
  }
  std::string detail = fmt::format("provider {}: {}/4 match", provider->id(), 4 - bad.size());
  for (const auto& b : bad) detail += "; " + b;
  return check(bad.empty(), detail);
}

Outcome dummies() {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> z;
  std::vector<econo::PriceRow> rows;
  double level = 100.0;
  for (Date d = parse_date("2014-01-01"); d <= parse_date("2023-12-31"); d = add_days(d, 1)) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) continue;
    const double open = level;
    level *= std::exp(0.01 * z(rng));
    rows.push_back({d, open, level});
  }
  const econo::PriceSeries prices(rows);
  std::vector<econo::MeetingEvent> events;
  std::map<Date, double> s;
  for (const char* m : {"2015-06-02", "2017-06-07", "2019-06-06", "2020-08-06", "2022-06-08"}) {
    econo::MeetingRow row{parse_date(m), std::nullopt, {}};
    events.push_back(econo::make_event(row, prices, econo::default_tenures(), econo::default_covid_window()));
    s[parse_date(m)] = 0.1;
  }
  econo::LPSpec spec;
  spec.max_horizon = 0;
  const auto p = econo::build_panel(events, s, prices, spec);
  auto col = [&](const std::string& n) {
    return static_cast<Eigen::Index>(std::find(p.columns.begin(), p.columns.end(), n) - p.columns.begin());
  };
  const auto covid = col("covid"), rajan = col("rajan"), patel = col("patel");
  bool ok = p.x.rows() == 5 && covid < p.x.cols() && rajan < p.x.cols() && patel < p.x.cols();
  ok = ok && p.x(2, covid) == 0 && p.x(3, covid) == 1 && p.x(4, covid) == 0;
  for (Eigen::Index i = 2; i < 5; ++i) ok = ok && p.x(i, rajan) == 0 && p.x(i, patel) == 0;  // Das tenure
  ok = ok && p.x(0, rajan) == 1 && p.x(0, patel) == 0 && p.x(1, patel) == 1 && p.x(1, rajan) == 0;
  return check(ok, fmt::format("covid 2019-06-06/2020-08-06/2022-06-08 = {:g}/{:g}/{:g}; Das rows rajan = patel = 0",
                               p.x(2, covid), p.x(3, covid), p.x(4, covid)));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"c-TF-IDF matches the brute-force oracle", ctfidf_oracle},
      {"sentiment balance algebra", balance_algebra},
      {"OLS noiseless recovery", ols_recovery},
      {"HAC equals the explicit double sum", hac_bruteforce},
      {"bootstrap coverage", bootstrap_coverage},
      {"null impulse response", null_irf},
      {"horizon returns", horizon_returns},
      {"end-to-end determinism on the mini corpus", end_to_end},
      {"golden sentiment examples", golden_sentences},
      {"dummy construction", dummies},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::cout << fmt::format("{} {:2} {}: {} [{:.1f}s]", tag, i + 1, criteria[i].first, o.detail, secs) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
