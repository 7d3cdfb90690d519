#include <doctest.h>

#include <cmath>
#include <random>

#include "cbcomm/econo.hpp"
#include "cbcomm/error.hpp"

using namespace cbcomm;
using namespace cbcomm::econo;

namespace {

const fs::path kData = CBCOMM_TEST_DATA_DIR;

json oracle() { return json::parse(read_file(kData / "econo_oracle.json")); }

Matrix to_matrix(const json& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

// Weekday calendar with a smooth random walk.
PriceSeries synthetic_prices(const std::string& start, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.01);
  std::vector<PriceRow> rows;
  Date d = parse_date(start);
  double level = 100.0;
  while (static_cast<int>(rows.size()) < n) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
      const double open = level;
      level *= std::exp(z(rng));
      rows.push_back({d, open, level});
    }
    d = add_days(d, 1);
  }
  return PriceSeries(rows);
}

}  // namespace

TEST_CASE("price parsing and meeting alignment") {
  const auto prices = load_prices(kData / "prices40.csv");
  REQUIRE(prices.size() == 40);
  // Saturday and a holiday roll forward, a trading day stays.
  CHECK(format_date(align_meeting(parse_date("2021-01-09"), prices)) == "2021-01-11");
  CHECK(format_date(align_meeting(parse_date("2021-01-26"), prices)) == "2021-01-27");
  CHECK(format_date(align_meeting(parse_date("2021-01-05"), prices)) == "2021-01-05");
  CHECK(format_date(align_meeting(parse_date("2020-12-25"), prices)) == "2021-01-04");
  CHECK_THROWS_AS(align_meeting(parse_date("2021-06-01"), prices), RangeError);

  CHECK_THROWS_AS(parse_prices(parse_csv("date,open\n2021-01-04,1\n")), CorruptionError);
  CHECK_THROWS_AS(parse_prices(parse_csv("date,open,close\n2021-01-04,1,x\n")), CorruptionError);
  CHECK_THROWS_AS(parse_prices(parse_csv("date,open,close\n2021-01-04,1,-2\n")), CorruptionError);
  CHECK_THROWS_AS(parse_prices(parse_csv("date,open,close\n2021-01-05,1,2\n2021-01-04,1,2\n")), CorruptionError);
}

TEST_CASE("horizon returns match the reference") {
  const auto prices = load_prices(kData / "prices40.csv");
  const auto o = oracle();
  int checked = 0;
  for (const auto& c : o["returns"]) {
    const auto t = parse_date(c["t"].get<std::string>());
    const int h = c["h"].get<int>();
    for (auto [key, unit] : {std::pair{"trading", HorizonUnit::trading}, std::pair{"calendar", HorizonUnit::calendar}}) {
      if (c[key].is_null()) {
        CHECK_THROWS_AS(horizon_return(prices, t, h, unit), HorizonUnavailable);
      } else {
        CHECK(horizon_return(prices, t, h, unit) == doctest::Approx(c[key].get<double>()).epsilon(1e-12));
        ++checked;
      }
    }
  }
  CHECK(checked >= 20);
  // Horizon 0 is the intraday move.
  const auto& r0 = prices.rows()[0];
  CHECK(horizon_return(prices, r0.date, 0) == doctest::Approx(std::log(r0.close / r0.open)));
  CHECK_THROWS_AS(horizon_return(prices, parse_date("2021-01-09"), 1), RangeError);
  CHECK_THROWS_AS(horizon_return(prices, r0.date, -1), ParameterError);
  CHECK_THROWS_AS(parse_horizon_unit("weeks"), ConfigError);
}

TEST_CASE("governor and covid dummies") {
  const auto t = default_tenures();
  CHECK(governor_for(parse_date("2015-06-02"), t) == Governor::rajan);
  CHECK(governor_for(parse_date("2016-09-03"), t) == Governor::rajan);
  CHECK(governor_for(parse_date("2016-09-04"), t) == Governor::patel);
  CHECK(governor_for(parse_date("2018-12-10"), t) == Governor::patel);
  CHECK(governor_for(parse_date("2018-12-11"), t) == Governor::das);
  CHECK(governor_for(parse_date("2022-06-08"), t) == Governor::das);
  CHECK_THROWS_AS(governor_for(parse_date("2010-01-01"), t), RangeError);
  CHECK(parse_governor("Shaktikanta Das") == Governor::das);
  CHECK(parse_governor("URJIT PATEL") == Governor::patel);
  CHECK_THROWS_AS(parse_governor("Subbarao"), ParameterError);

  const auto w = default_covid_window();
  CHECK(covid_flag(parse_date("2019-06-06"), w) == 0);
  CHECK(covid_flag(parse_date("2020-03-11"), w) == 1);
  CHECK(covid_flag(parse_date("2020-08-06"), w) == 1);
  CHECK(covid_flag(parse_date("2021-12-31"), w) == 1);
  CHECK(covid_flag(parse_date("2022-06-08"), w) == 0);

  const auto prices = synthetic_prices("2019-01-01", 1100, 1);
  std::map<Date, double> s;
  std::vector<MeetingEvent> ev;
  for (const char* d : {"2019-06-06", "2020-08-06", "2022-06-08"}) {
    MeetingRow r;
    r.meeting_date = parse_date(d);
    ev.push_back(make_event(r, prices, t, w));
    s[r.meeting_date] = 0.1;
  }
  LPSpec spec;
  spec.max_horizon = 2;
  const auto p = build_panel(ev, s, prices, spec);
  REQUIRE(p.columns == std::vector<std::string>{"intercept", "S", "covid", "rajan", "patel"});
  CHECK(p.x(0, 2) == 0);
  CHECK(p.x(1, 2) == 1);
  CHECK(p.x(2, 2) == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK(p.x(i, 3) == 0);  // all Das
    CHECK(p.x(i, 4) == 0);
  }
}

TEST_CASE("meetings table") {
  const auto rows = parse_meetings(parse_csv(
      "meeting_date,governor,repo_change,cpi\n2020-08-06,,0,6.9\n2016-10-04,Urjit Patel,-0.25,NA\n"));
  REQUIRE(rows.size() == 2);
  CHECK(format_date(rows[0].meeting_date) == "2016-10-04");
  CHECK(rows[0].governor == Governor::patel);
  CHECK(!rows[0].controls.at("cpi").has_value());
  CHECK(*rows[0].controls.at("repo_change") == -0.25);
  CHECK(!rows[1].governor.has_value());
  CHECK_THROWS_AS(parse_meetings(parse_csv("meeting_date\n2020-01-01\n2020-01-01\n")), CorruptionError);
  CHECK_THROWS_AS(parse_meetings(parse_csv("meeting_date,x\n2020-01-01,abc\n")), CorruptionError);
  CHECK_THROWS_AS(parse_meetings(parse_csv("date\n2020-01-01\n")), CorruptionError);
}

TEST_CASE("OLS and HAC agree with the reference") {
  const auto o = oracle()["hac"];
  const Matrix x = to_matrix(o["x"]);
  Vector y(x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = o["y"][i].get<double>();
  const auto fit = ols(y, x);
  for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK(fit.beta(j) == doctest::Approx(o["beta"][j].get<double>()).epsilon(1e-10));
  for (int lag = 0; lag <= 3; ++lag) {
    const Matrix ref = to_matrix(o["cov"][std::to_string(lag)]);
    const Matrix got = hac_covariance(x, fit.residuals, lag);
    CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("HAC equals the brute-force double sum") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  const int n = 25, k = 3, lag = 4;
  Matrix x(n, k);
  Vector u(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1) = z(rng);
    x(i, 2) = z(rng);
    u(i) = z(rng);
  }
  Matrix meat = Matrix::Zero(k, k);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      const int l = std::abs(s - t);
      if (l > lag) continue;
      meat += (1.0 - double(l) / (lag + 1)) * u(s) * u(t) * x.row(s).transpose() * x.row(t);
    }
  const Matrix inv = (x.transpose() * x).inverse();
  const Matrix ref = inv * meat * inv;
  CHECK((hac_covariance(x, u, lag) - ref).cwiseAbs().maxCoeff() < 1e-12);
  // Lag 0 is the White sandwich.
  Matrix white = Matrix::Zero(k, k);
  for (int t = 0; t < n; ++t) white += u(t) * u(t) * x.row(t).transpose() * x.row(t);
  CHECK((hac_covariance(x, u, 0) - inv * white * inv).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(hac_covariance(x, u, -1), ParameterError);
}

TEST_CASE("collinear designs name the offending columns") {
  Matrix x(10, 3);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 1;
    x(i, 1) = 2.0;  // constant sentiment
    x(i, 2) = i;
  }
  try {
    check_full_rank(x, {"intercept", "S", "trend"});
    FAIL("expected EstimationError");
  } catch (const EstimationError& e) {
    const auto& c = e.collinear_columns();
    CHECK(std::find(c.begin(), c.end(), "intercept") != c.end());
    CHECK(std::find(c.begin(), c.end(), "S") != c.end());
    CHECK(std::string(e.what()).find("'S'") != std::string::npos);
  }
  CHECK_THROWS_AS(check_full_rank(Matrix::Ones(3, 3), {}), EstimationError);
}

TEST_CASE("quantiles and intervals") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4);
  CHECK(quantile({10, 20}, 0.05) == doctest::Approx(10.5));
  std::vector<double> reps(1001);
  for (int i = 0; i <= 1000; ++i) reps[i] = i / 1000.0;
  const auto [lo, hi] = bootstrap_interval(reps, 0.5, 90, BootstrapKind::percentile);
  CHECK(lo == doctest::Approx(0.05));
  CHECK(hi == doctest::Approx(0.95));
  // A centred estimate leaves the bias-corrected band where the percentile one is.
  const auto [blo, bhi] = bootstrap_interval(reps, 0.5, 90, BootstrapKind::bias_corrected);
  CHECK(blo == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(bhi == doctest::Approx(0.95).epsilon(1e-6));
  // An estimate below every replicate pushes the band down to the floor.
  const auto [plo, phi] = bootstrap_interval(reps, -1.0, 90, BootstrapKind::bias_corrected);
  CHECK(plo < 0.01);
  CHECK(phi < 0.5);
  CHECK_THROWS_AS(bootstrap_interval({}, 0, 90, BootstrapKind::percentile), ParameterError);
  CHECK_THROWS_AS(bootstrap_interval(reps, 0, 100, BootstrapKind::percentile), ParameterError);
}

namespace {

struct Planted {
  PriceSeries prices;
  std::vector<MeetingEvent> events;
  std::map<Date, double> sentiment;
};

// Meetings every ~20 trading days with returns that load on S.
Planted planted(double beta, int n_meetings, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.002);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n_days = n_meetings * 20 + 60;
  std::vector<double> s_at(n_days, 0.0);
  for (int m = 0; m < n_meetings; ++m) s_at[m * 20 + 5] = u(rng);
  std::vector<PriceRow> rows;
  Date d = parse_date("2019-01-01");
  double level = 100.0;
  double shock = 0.0;
  while (static_cast<int>(rows.size()) < n_days) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
      const std::size_t i = rows.size();
      if (s_at[i] != 0.0) shock = s_at[i];
      const double open = level;
      level *= std::exp(beta * shock / 10.0 + z(rng));
      rows.push_back({d, open, level});
      if (s_at[i] == 0.0 && i % 20 == 15) shock = 0.0;
    }
    d = add_days(d, 1);
  }
  Planted p{PriceSeries(rows), {}, {}};
  for (int m = 0; m < n_meetings; ++m) {
    MeetingRow r;
    r.meeting_date = rows[static_cast<std::size_t>(m * 20 + 5)].date;
    p.events.push_back(make_event(r, p.prices, default_tenures(), default_covid_window()));
    p.sentiment[r.meeting_date] = s_at[m * 20 + 5];
  }
  return p;
}

}  // namespace

TEST_CASE("local projections recover a planted response") {
  const auto pl = planted(0.5, 60, 11);
  LPSpec spec;
  spec.max_horizon = 5;
  spec.include_dummies = false;
  spec.bootstrap.replications = 200;
  spec.bootstrap.seed = 3;
  const auto panel = build_panel(pl.events, pl.sentiment, pl.prices, spec);
  CHECK(panel.x.rows() == 60);
  const auto res = lp_estimate(panel, spec);
  REQUIRE(res.horizons.size() == 6);
  for (const auto& e : res.horizons) {
    // Cumulative response (h+1) * 0.05 per unit of S.
    CHECK(e.beta(1) == doctest::Approx(0.05 * (e.h + 1)).epsilon(0.1));
    CHECK(e.ci_low <= e.beta(1));
    CHECK(e.beta(1) <= e.ci_high);
    CHECK(e.lag == std::max(1, e.h));
    CHECK(e.se(1) > 0);
  }
  // Deterministic for a fixed seed and different for another.
  const auto again = lp_estimate(panel, spec);
  CHECK(again.horizons[3].ci_low == res.horizons[3].ci_low);
  spec.bootstrap.seed = 4;
  CHECK(lp_estimate(panel, spec).horizons[3].ci_low != res.horizons[3].ci_low);

  spec.bootstrap.replications = 0;
  const auto nob = lp_estimate(panel, spec);
  CHECK(std::isnan(nob.horizons[0].ci_low));
  CHECK(nob.horizons[2].beta(1) == res.horizons[2].beta(1));
}

TEST_CASE("bootstrap collapses when the response is exact") {
  auto pl = planted(0.0, 30, 12);
  LPSpec spec;
  spec.max_horizon = 1;
  spec.include_dummies = false;
  spec.bootstrap.replications = 100;
  auto panel = build_panel(pl.events, pl.sentiment, pl.prices, spec);
  for (Eigen::Index i = 0; i < panel.y.rows(); ++i)
    for (Eigen::Index h = 0; h < panel.y.cols(); ++h) panel.y(i, h) = 0.2 + 0.7 * panel.x(i, 1);
  const auto reps = bootstrap_replicates(panel, 1, spec.bootstrap);
  REQUIRE(reps.size() == 2);
  CHECK(reps[1].rows() == 100);
  CHECK((reps[1].col(1).array() - 0.7).abs().maxCoeff() < 1e-10);
  const auto res = lp_estimate(panel, spec);
  CHECK(res.horizons[1].ci_low == doctest::Approx(0.7));
  CHECK(res.horizons[1].ci_high == doctest::Approx(0.7));
}

TEST_CASE("panel edge cases") {
  const auto pl = planted(0.2, 20, 13);
  LPSpec spec;
  spec.max_horizon = 330;  // past the data for late meetings
  spec.bootstrap.replications = 0;
  spec.include_dummies = false;
  auto sent = pl.sentiment;
  sent.erase(pl.events[4].meeting_date);
  const auto panel = build_panel(pl.events, sent, pl.prices, spec);
  CHECK(panel.x.rows() == 19);
  CHECK(panel.dropped.size() >= 2);
  CHECK(std::isnan(panel.y(18, 100)));
  const auto res = lp_estimate(panel, spec);
  CHECK(!res.warnings.empty());
  CHECK(res.horizons.size() < 331);
  CHECK(res.horizons.back().n_obs >= 7);

  spec.controls = {"cpi"};
  CHECK_THROWS_AS(build_panel(pl.events, sent, pl.prices, spec), ConfigError);

  LPSpec bad;
  bad.bootstrap.replications = 50;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.bootstrap.replications = 0;
  bad.bootstrap.level = 100;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.bootstrap.level = 90;
  bad.max_horizon = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // Too few meetings at h = 0.
  LPSpec tiny;
  tiny.max_horizon = 0;
  tiny.bootstrap.replications = 0;
  std::vector<MeetingEvent> few(pl.events.begin(), pl.events.begin() + 6);
  CHECK_THROWS_AS(lp_estimate(build_panel(few, pl.sentiment, pl.prices, tiny), tiny), EstimationError);
  CHECK(parse_bootstrap_kind("bias_corrected") == BootstrapKind::bias_corrected);
  CHECK_THROWS_AS(parse_regressor_kind("mood"), ConfigError);
}

TEST_CASE("OLS residuals are orthogonal to the regressors") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  Matrix x(80, 4);
  Vector y(80);
  for (Eigen::Index i = 0; i < 80; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < 4; ++j) x(i, j) = z(rng) * double(j);
    y(i) = 0.3 - x(i, 1) + 0.2 * x(i, 3) + z(rng);
  }
  const auto fit = ols(y, x);
  const Vector xe = x.transpose() * fit.residuals;
  CHECK(xe.cwiseAbs().maxCoeff() < 1e-10 * x.cwiseAbs().maxCoeff() * y.cwiseAbs().sum());
  CHECK((y - x * fit.beta - fit.residuals).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("an exact linear response is recovered at every horizon") {
  // y_h = 0.01 h S with no noise: the fitted slope is 0.01 h to rounding.
  Panel p;
  p.columns = {"intercept", "S"};
  const int n = 40, H = 10;
  p.x.resize(n, 2);
  p.y.resize(n, H + 1);
  for (int i = 0; i < n; ++i) {
    p.x(i, 0) = 1.0;
    p.x(i, 1) = std::sin(0.37 * i) + 0.1 * i;
    p.meeting_dates.push_back(add_days(parse_date("2020-01-01"), 7 * i));
    for (int h = 0; h <= H; ++h) p.y(i, h) = 0.01 * h * p.x(i, 1);
  }
  LPSpec spec;
  spec.max_horizon = H;
  spec.bootstrap.replications = 0;
  const auto res = lp_estimate(p, spec);
  REQUIRE(res.horizons.size() == std::size_t(H + 1));
  for (const auto& e : res.horizons) {
    CHECK(std::abs(e.beta(1) - 0.01 * e.h) < 1e-10);
    CHECK(std::abs(e.beta(0)) < 1e-10);
    CHECK(e.n_obs == n);
  }
}

TEST_CASE("HAC and White standard errors agree under iid errors") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  const int n = 4000;
  Matrix x(n, 2);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z(rng);
    y(i) = 1.0 + 0.5 * x(i, 1) + z(rng);
  }
  const auto fit = ols(y, x);
  const double se0 = std::sqrt(hac_covariance(x, fit.residuals, 0)(1, 1));
  const double se3 = std::sqrt(hac_covariance(x, fit.residuals, 3)(1, 1));
  CHECK(std::abs(se3 / se0 - 1.0) < 0.15);
}
